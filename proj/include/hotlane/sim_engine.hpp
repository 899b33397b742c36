#pragma once

// Closed-loop simulation: demand -> quote -> lane choice -> queues -> estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "hotlane/controllers.hpp"
#include "hotlane/core_model.hpp"
#include "hotlane/errors.hpp"
#include "hotlane/lane_choice.hpp"
#include "hotlane/scenario.hpp"

namespace hotlane {

using RngStream = std::mt19937_64;

struct SystemState {
  double t = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double zeta = 0.0;
  double w = 0.0;
  double pi = 0.0;  // controller's VOT estimate, NaN if it keeps none
  double u = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double eta = 0.0;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct Trajectory {
  std::vector<SystemState> states;
  std::uint64_t fingerprint = 0;
  double dt = 0.0;
  std::string controller;
};

struct SummaryMetrics {
  double avg_g1 = 0.0;
  double final_u = 0.0;
  double final_pi = 0.0;
  double max_lambda1 = 0.0;
  double final_lambda1 = 0.0;
  std::optional<double> time_to_zero_queue;
  double pi_rmse_tail = 0.0;
  std::size_t negative_price_steps = 0;
};

/// Demand rates at time t. Poisson profiles draw one count per call over
/// `window` minutes (callers hold the result for that long).
template <class Rng>
std::pair<double, double> demand_at(const DemandProfile& p, double t, double window, Rng& rng) {
  switch (p.kind) {
    case DemandKind::constant:
      return {p.mean_q1, p.mean_q2};
    case DemandKind::poisson: {
      std::poisson_distribution<long long> n1(p.mean_q1 * window);
      std::poisson_distribution<long long> n2(p.mean_q2 * window);
      const double a = p.mean_q1 > 0.0 ? static_cast<double>(n1(rng)) / window : 0.0;
      const double b = p.mean_q2 > 0.0 ? static_cast<double>(n2(rng)) / window : 0.0;
      return {a, b};
    }
    case DemandKind::timeseries: {
      const auto it = std::upper_bound(p.samples.begin(), p.samples.end(), t,
                                       [](double x, const DemandSample& s) { return x < s.t; });
      if (it == p.samples.begin()) {
        std::ostringstream msg;
        msg << "demand.samples: no sample at or before t=" << t;
        throw ConfigError(msg.str());
      }
      return {std::prev(it)->q1, std::prev(it)->q2};
    }
  }
  return {0.0, 0.0};
}

/// Per-run demand source; holds Poisson draws for the configured interval.
class DemandGenerator {
 public:
  DemandGenerator(const DemandProfile& p, StepSize step) : profile_(p) {
    if (p.kind == DemandKind::poisson) {
      const auto n = std::llround(p.count_interval / step.dt);
      steps_per_draw_ = static_cast<std::size_t>(std::max<long long>(1, n));
      window_ = static_cast<double>(steps_per_draw_) * step.dt;
    } else {
      window_ = step.dt;
    }
  }

  template <class Rng>
  std::pair<double, double> at(std::size_t step_index, double t, Rng& rng) {
    if (profile_.kind != DemandKind::poisson || step_index % steps_per_draw_ == 0)
      held_ = demand_at(profile_, t, window_, rng);
    return held_;
  }

 private:
  const DemandProfile& profile_;
  std::size_t steps_per_draw_ = 1;
  double window_ = 0.0;
  std::pair<double, double> held_{0.0, 0.0};
};

/// Runs one controller over the scenario. Per step: w from the current
/// queues, demand, quote, eta, lane choice, throughputs, queue update, then
/// the controller observes the same-step lambda1 and zeta.
template <PricingController C>
Trajectory run_with(const ScenarioConfig& cfg, C& controller, std::uint64_t seed) {
  RngStream rng(seed);
  DemandGenerator demand(cfg.demand, cfg.step);

  const std::size_t n = cfg.steps();
  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.dt = cfg.step.dt;

  QueueState queues = cfg.initial;
  double u = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.step.dt;
    const TimingState timing = queuing_times(queues, cfg.caps);
    const auto [q1, q2] = demand.at(k, t, rng);

    // With no SOV demand there is nobody to price; hold the last quote.
    if (q2 > 0.0) {
      try {
        u = controller.quote(QuoteInput{t, timing.w, q1, q2, cfg.caps.c1});
      } catch (const LogDomainError& e) {
        std::ostringstream msg;
        msg << "step " << k << " (t=" << t << "): " << e.what();
        throw LogDomainError(msg.str(), static_cast<std::ptrdiff_t>(k));
      } catch (const ControllerError& e) {
        std::ostringstream msg;
        msg << "step " << k << " (t=" << t << "): " << e.what();
        throw ControllerError(msg.str(), static_cast<std::ptrdiff_t>(k));
      }
    }

    const double eta = sample_eta(cfg.noise, rng);
    const double q3 = paying_demand(q2, u, timing.w, eta, cfg.behavior);
    const double zeta = residual_capacity(cfg.caps.c1, q1, q3);
    const Throughputs g = throughputs(queues, zeta, q1, q2, cfg.caps, cfg.step);

    traj.states.push_back(SystemState{t, queues.lambda1, queues.lambda2, zeta, timing.w,
                                      controller.vot_estimate(), u, g.g1, g.g2, q1, q2, q3, eta});

    const double lambda1_now = queues.lambda1;
    queues = step_point_queues(queues, zeta, q1, q2, cfg.caps, cfg.step);
    controller.observe(Observation{lambda1_now, zeta, timing.w, u, q1, q2, q3, cfg.step});
  }
  return traj;
}

inline Trajectory run_closed_loop(const ScenarioConfig& cfg, std::uint64_t seed) {
  AnyController controller = make_controller(cfg.controller, cfg.caps);
  Trajectory traj = std::visit([&](auto& c) { return run_with(cfg, c, seed); }, controller);
  ScenarioConfig fp = cfg;
  fp.seed = seed;
  traj.fingerprint = fingerprint(fp);
  traj.controller = std::string(to_string(cfg.controller.kind));
  return traj;
}

inline Trajectory run_closed_loop(const ScenarioConfig& cfg) { return run_closed_loop(cfg, cfg.seed); }

/// First time after which `holds` is true for every remaining state; nullopt
/// if it fails at the final state.
inline std::optional<double> settle_time(const std::vector<SystemState>& states,
                                         const std::function<bool(const SystemState&)>& holds) {
  if (states.empty()) return std::nullopt;
  for (std::size_t i = states.size(); i-- > 0;) {
    if (!holds(states[i])) {
      if (i + 1 == states.size()) return std::nullopt;
      return states[i + 1].t;
    }
  }
  return states.front().t;
}

inline constexpr double kZeroQueue = 1e-6;

inline SummaryMetrics summarize(const Trajectory& traj, double pi_star) {
  SummaryMetrics m;
  const auto& s = traj.states;
  if (s.empty()) return m;

  double g1_sum = 0.0;
  for (const auto& x : s) {
    g1_sum += x.g1;
    m.max_lambda1 = std::max(m.max_lambda1, x.lambda1);
    if (x.u < 0.0) ++m.negative_price_steps;
  }
  m.avg_g1 = g1_sum / static_cast<double>(s.size());
  m.final_u = s.back().u;
  m.final_pi = s.back().pi;
  m.final_lambda1 = s.back().lambda1;
  m.time_to_zero_queue = settle_time(s, [](const SystemState& x) { return x.lambda1 < kZeroQueue; });

  const double t_tail = s.front().t + 0.75 * (s.back().t - s.front().t);
  double sq = 0.0;
  std::size_t cnt = 0;
  for (const auto& x : s) {
    if (x.t + 1e-12 < t_tail) continue;
    sq += (x.pi - pi_star) * (x.pi - pi_star);
    ++cnt;
  }
  m.pi_rmse_tail = cnt ? std::sqrt(sq / static_cast<double>(cnt)) : 0.0;
  return m;
}

}  // namespace hotlane
