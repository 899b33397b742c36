#pragma once

// Binary logit choice of single-occupancy vehicles between paying for the
// HOT lanes and queuing on the GP lanes.

#include <cmath>
#include <random>

#include "hotlane/core_model.hpp"

namespace hotlane {

struct BehaviorParams {
  double pi_star = 0.5;     // true average value of time, $/min
  double alpha_star = 1.0;  // logit scale, 1/$
};

enum class NoiseKind { none, uniform };

/// Multiplicative perturbation eta of the perceived value of time.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double half_width = 0.0;  // eta ~ U[-half_width, half_width]
};

namespace detail {

// 1 / (1 + exp(x)) without overflow for large |x|.
inline double logistic_complement(double x) noexcept {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace detail

/// Share of SOVs that pay: 1 / (1 + exp(alpha* (u - (1 + eta) pi* w))).
inline double paying_share(double u, double w, double eta, const BehaviorParams& p) noexcept {
  return detail::logistic_complement(p.alpha_star * (u - (1.0 + eta) * p.pi_star * w));
}

inline double paying_demand(double q2, double u, double w, double eta,
                            const BehaviorParams& p) noexcept {
  return q2 * paying_share(u, w, eta, p);
}

/// Residual HOT capacity left over once paying SOVs have made their choice.
inline double induced_residual_capacity(double c1, double q1, double q2, double u, double w,
                                        double eta, const BehaviorParams& p) noexcept {
  return residual_capacity(c1, q1, paying_demand(q2, u, w, eta, p));
}

/// One i.i.d. draw of eta. Consumes nothing from the stream when noise is off.
template <class Rng>
double sample_eta(const NoiseSpec& noise, Rng& rng) {
  if (noise.kind == NoiseKind::none || noise.half_width == 0.0) return 0.0;
  std::uniform_real_distribution<double> dist(-noise.half_width, noise.half_width);
  return dist(rng);
}

}  // namespace hotlane
