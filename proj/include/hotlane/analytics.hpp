#pragma once

// Closed-form results for constant demand and the near-equilibrium analysis
// of the VOT controller's closed loop.
//
// Near equilibrium the residual capacity obeys
//     d(zeta)/dt ~= beta * t * (K1 lambda1 - K2 zeta),
// a switched linear time-variant system with two asymptotic regimes:
//   Gaussian     lambda1 == 0, zeta ~ zeta0 exp(-beta K2 t^2 / 2)
//   Exponential  lambda1 > 0,  lambda1 / zeta -> K2 / K1,
//                lambda1 ~ lambda10 exp(-(K1/K2) t)

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include "hotlane/core_model.hpp"
#include "hotlane/errors.hpp"

namespace hotlane {

struct ConstantScenarioParams {
  double q1 = 10.0;
  double q2 = 60.0;
  double c1 = 30.0;
  double c2 = 30.0;
  double pi_star = 0.5;
  double alpha_star = 1.0;
};

inline void check_assumptions(const ConstantScenarioParams& p) {
  if (!(p.q1 < p.c1)) {
    std::ostringstream msg;
    msg << "HOV demand must stay below HOT capacity (q1 < c1): q1=" << p.q1 << ", c1=" << p.c1;
    throw AssumptionError(msg.str());
  }
  if (!(p.q1 + p.q2 > p.c1 + p.c2)) {
    std::ostringstream msg;
    msg << "total demand must exceed total capacity (q1 + q2 > c1 + c2): " << p.q1 + p.q2
        << " <= " << p.c1 + p.c2;
    throw AssumptionError(msg.str());
  }
}

/// Toll that holds the corridor at its optimum when demand and VOT are
/// known: affine in t with slope ((q1+q2-c1-c2)/c2) pi*.
inline double analytic_optimal_price(double t, const ConstantScenarioParams& p) {
  check_assumptions(p);
  const double growth = (p.q1 + p.q2 - p.c1 - p.c2) / p.c2;
  return growth * p.pi_star * t + std::log((p.q1 + p.q2 - p.c1) / (p.c1 - p.q1)) / p.alpha_star;
}

inline double beta(const ConstantScenarioParams& p) {
  check_assumptions(p);
  return p.alpha_star * (p.q1 + p.q2 - p.c1 - p.c2) * (p.q1 + p.q2 - p.c1) * (p.c1 - p.q1) /
         (p.c2 * p.q2);
}

struct ApproxState {
  double lambda1 = 0.0;
  double zeta = 0.0;
  double t = 0.0;
};

constexpr ApproxState step_approximate(const ApproxState& s, double k1, double k2,
                                       double beta_val, StepSize step) noexcept {
  const double dt = step.dt;
  return {
      std::max(s.lambda1 - s.zeta * dt, 0.0),
      s.zeta + dt * beta_val * s.t * (k1 * s.lambda1 - k2 * s.zeta),
      s.t + dt,
  };
}

/// States at t0, t0 + dt, ..., t0 + horizon.
inline std::vector<ApproxState> integrate_approximate(ApproxState s, double k1, double k2,
                                                      double beta_val, StepSize step,
                                                      double horizon) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / step.dt));
  const double t0 = s.t;
  std::vector<ApproxState> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    s.t = t0 + static_cast<double>(k) * step.dt;  // no drift from repeated addition
    out.push_back(s);
    s = step_approximate(s, k1, k2, beta_val, step);
  }
  return out;
}

inline double gaussian_tail(double zeta0, double t, double beta_val, double k2) noexcept {
  return zeta0 * std::exp(-0.5 * beta_val * k2 * t * t);
}

/// (lambda1, zeta) on the exponential manifold zeta = (k1/k2) lambda1.
inline std::pair<double, double> exponential_tail(double lambda10, double t, double k1,
                                                  double k2) noexcept {
  const double rate = k1 / k2;
  const double lambda1 = lambda10 * std::exp(-rate * t);
  return {lambda1, rate * lambda1};
}

// ---------------------------------------------------------------------------
// Convergence-pattern classification

enum class Pattern { gaussian, exponential, undetermined };

inline std::string_view to_string(Pattern p) noexcept {
  switch (p) {
    case Pattern::gaussian: return "gaussian";
    case Pattern::exponential: return "exponential";
    case Pattern::undetermined: return "undetermined";
  }
  return "?";
}

struct PhaseSample {
  double t = 0.0;
  double lambda1 = 0.0;
  double zeta = 0.0;
};

struct PatternReport {
  Pattern pattern = Pattern::undetermined;
  double ratio_estimate = std::numeric_limits<double>::quiet_NaN();  // lambda1/zeta at window end
  double fit_r2_gaussian = 0.0;
  double fit_r2_exponential = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y ~ a x + b. r2 is 0 for fewer than 3 points or a
/// degenerate abscissa, and clamped into [0, 1].
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  LinearFit f;
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 3) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (!(syy > 0.0)) {
    f.r2 = 1.0;
    return f;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += e * e;
  }
  f.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return f;
}

inline constexpr double kConvergedFloor = 1e-9;
inline constexpr double kRatioTolerance = 0.10;

/// Classifies the asymptotic regime of a (t, lambda1, zeta) series.
///
/// The window spans `tail_window` minutes and ends at the last sample where
/// max(lambda1, |zeta|) is above kConvergedFloor, so runs that settle early
/// are judged on their decay and not on rounding noise.
///   Gaussian:     lambda1 <= floor and zeta > 0 throughout the window.
///   Exponential:  lambda1 > floor throughout and the end-of-window ratio
///                 lambda1/zeta within 10% of k2/k1.
inline PatternReport classify_pattern(std::span<const PhaseSample> series, double tail_window,
                                      double k1, double k2) {
  PatternReport rep;
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].lambda1 > kConvergedFloor || std::abs(series[i].zeta) > kConvergedFloor)
      last = static_cast<std::ptrdiff_t>(i);
  }
  if (last < 0) return rep;

  const double t_end = series[static_cast<std::size_t>(last)].t;
  const double t_start = t_end - tail_window;
  rep.window_start = std::max(t_start, series.front().t);
  rep.window_end = t_end;

  bool queue_empty = true, zeta_positive = true, queue_positive = true;
  std::vector<double> tg, lz, te, ll;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(last); ++i) {
    const auto& s = series[i];
    if (s.t + 1e-12 < t_start) continue;
    queue_empty = queue_empty && s.lambda1 <= kConvergedFloor;
    queue_positive = queue_positive && s.lambda1 > kConvergedFloor;
    zeta_positive = zeta_positive && s.zeta > 0.0;
    if (s.zeta > kConvergedFloor) {
      tg.push_back(s.t * s.t);
      lz.push_back(std::log(s.zeta));
    }
    if (s.lambda1 > kConvergedFloor) {
      te.push_back(s.t);
      ll.push_back(std::log(s.lambda1));
    }
  }
  rep.fit_r2_gaussian = fit_line(tg, lz).r2;
  rep.fit_r2_exponential = fit_line(te, ll).r2;

  const auto& tail = series[static_cast<std::size_t>(last)];
  if (tail.zeta != 0.0) rep.ratio_estimate = tail.lambda1 / tail.zeta;

  if (queue_empty && zeta_positive) {
    rep.pattern = Pattern::gaussian;
  } else if (queue_positive && std::isfinite(rep.ratio_estimate) &&
             std::abs(rep.ratio_estimate / (k2 / k1) - 1.0) <= kRatioTolerance) {
    rep.pattern = Pattern::exponential;
  }
  return rep;
}

inline std::vector<PhaseSample> phase_series(std::span<const ApproxState> states) {
  std::vector<PhaseSample> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({s.t, s.lambda1, s.zeta});
  return out;
}

/// Bisection on a gain. `classify(k)` must be a pure function of the gain
/// returning a Pattern; the two ends must classify differently. The search
/// locates where the high end's pattern sets in, so midpoints that are
/// Undetermined (e.g. a queue that clears late) count toward the low side.
template <class Classifier>
double find_phase_boundary(Classifier&& classify, double low, double high, double resolution) {
  const Pattern p_low = classify(low);
  const Pattern p_high = classify(high);
  if (p_low == p_high) {
    std::ostringstream msg;
    msg << "phase boundary not bracketed: both ends of [" << low << ", " << high
        << "] classify as " << to_string(p_low);
    throw BoundaryNotBracketedError(msg.str());
  }
  while (high - low > resolution) {
    const double mid = 0.5 * (low + high);
    if (classify(mid) == p_high)
      high = mid;
    else
      low = mid;
  }
  return 0.5 * (low + high);
}

}  // namespace hotlane
