#pragma once

// Everything needed to reproduce one closed-loop run. Defaults reproduce the
// reference corridor: one HOT and one GP lane of 30 veh/min each, HOV demand
// 10 veh/min, SOV demand 60 veh/min, T = 20 min at dt = 1/60 min, true VOT
// $0.5/min, logit scale 1, VOT controller with K1 = K2 = 0.1 and pi(0) = 0.25.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hotlane/controllers.hpp"
#include "hotlane/core_model.hpp"
#include "hotlane/lane_choice.hpp"

namespace hotlane {

enum class DemandKind { constant, poisson, timeseries };

struct DemandSample {
  double t = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
};

struct DemandProfile {
  DemandKind kind = DemandKind::constant;
  double mean_q1 = 10.0;
  double mean_q2 = 60.0;
  // Poisson counts are drawn once per interval and held; rate = N / interval.
  double count_interval = 1.0;
  std::vector<DemandSample> samples;  // timeseries, sorted by t
};

enum class ControllerKind { vot, integral, selflearning };

inline std::string_view to_string(ControllerKind k) noexcept {
  switch (k) {
    case ControllerKind::vot: return "vot";
    case ControllerKind::integral: return "integral";
    case ControllerKind::selflearning: return "selflearning";
  }
  return "?";
}

struct ControllerSpec {
  ControllerKind kind = ControllerKind::vot;
  VotEstimatorState vot{};
  IntegralTollState integral{};
  bool integral_target_from_capacity = true;  // target_q_hot = c1
  SelfLearningState selflearning{};
};

struct AnalysisSpec {
  double tail_window = std::nan("");  // NaN -> 25% of the horizon
  double approx_lambda1 = 1.0;
  double approx_zeta = 0.11;
};

struct ScenarioConfig {
  Capacities caps{};
  double horizon = 20.0;
  StepSize step{};
  DemandProfile demand{};
  BehaviorParams behavior{};
  NoiseSpec noise{};
  ControllerSpec controller{};
  QueueState initial{};
  std::uint64_t seed = 1;
  int replications = 1;
  AnalysisSpec analysis{};

  std::size_t steps() const noexcept {
    return static_cast<std::size_t>(std::llround(horizon / step.dt));
  }
  double tail_window() const noexcept {
    return std::isnan(analysis.tail_window) ? 0.25 * horizon : analysis.tail_window;
  }
};

inline AnyController make_controller(const ControllerSpec& spec, const Capacities& caps) {
  switch (spec.kind) {
    case ControllerKind::vot:
      return VotController(spec.vot);
    case ControllerKind::integral: {
      IntegralTollState s = spec.integral;
      if (spec.integral_target_from_capacity) s.target_q_hot = caps.c1;
      return IntegralTollController(s);
    }
    case ControllerKind::selflearning:
      return SelfLearningController(spec.selflearning);
  }
  return VotController(spec.vot);
}

namespace detail {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void f(double v) { u(std::bit_cast<std::uint64_t>(v)); }
  void u(std::uint64_t v) { bytes(&v, sizeof v); }
};

}  // namespace detail

/// Stable 64-bit hash of every field that influences a run.
inline std::uint64_t fingerprint(const ScenarioConfig& c) {
  detail::Fnv1a h;
  h.f(c.caps.c1); h.f(c.caps.c2);
  h.f(c.horizon); h.f(c.step.dt);
  h.u(static_cast<std::uint64_t>(c.demand.kind));
  h.f(c.demand.mean_q1); h.f(c.demand.mean_q2); h.f(c.demand.count_interval);
  for (const auto& s : c.demand.samples) { h.f(s.t); h.f(s.q1); h.f(s.q2); }
  h.f(c.behavior.pi_star); h.f(c.behavior.alpha_star);
  h.u(static_cast<std::uint64_t>(c.noise.kind)); h.f(c.noise.half_width);
  const auto& ct = c.controller;
  h.u(static_cast<std::uint64_t>(ct.kind));
  h.f(ct.vot.pi); h.f(ct.vot.k1); h.f(ct.vot.k2); h.f(ct.vot.alpha_guess);
  h.f(ct.integral.u); h.f(ct.integral.k_i); h.f(ct.integral.target_q_hot);
  h.u(ct.integral_target_from_capacity ? 1 : 0);
  for (int i = 0; i < 3; ++i) h.f(ct.selflearning.theta[i]);
  for (int i = 0; i < 9; ++i) h.f(ct.selflearning.covariance.data()[i]);
  for (int i = 0; i < 9; ++i) h.f(ct.selflearning.q_proc.data()[i]);
  h.f(ct.selflearning.r);
  h.f(c.initial.lambda1); h.f(c.initial.lambda2);
  h.u(c.seed);
  return h.h;
}

}  // namespace hotlane
