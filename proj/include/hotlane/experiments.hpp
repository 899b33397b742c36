#pragma once

// Glue between scenarios and the analysis routines: classify runs, sweep a
// gain, and locate the Gaussian/exponential switch.

#include <future>
#include <string>
#include <string_view>
#include <vector>

#include "hotlane/analytics.hpp"
#include "hotlane/errors.hpp"
#include "hotlane/scenario.hpp"
#include "hotlane/sim_engine.hpp"

namespace hotlane {

enum class ModelKind { closed_loop, approximate };

inline ConstantScenarioParams constant_params(const ScenarioConfig& cfg) {
  if (cfg.demand.kind != DemandKind::constant)
    throw UsageError("closed-form analysis requires demand.kind = \"constant\"");
  return {cfg.demand.mean_q1, cfg.demand.mean_q2, cfg.caps.c1, cfg.caps.c2,
          cfg.behavior.pi_star, cfg.behavior.alpha_star};
}

inline std::vector<PhaseSample> phase_series(const Trajectory& traj) {
  std::vector<PhaseSample> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) out.push_back({s.t, s.lambda1, s.zeta});
  return out;
}

/// Approximate near-equilibrium model from the configured (lambda1, zeta)
/// start at t = 0, with beta from the constant-demand parameters.
inline std::vector<ApproxState> run_approximate(const ScenarioConfig& cfg) {
  const double b = beta(constant_params(cfg));
  const auto& v = cfg.controller.vot;
  return integrate_approximate({cfg.analysis.approx_lambda1, cfg.analysis.approx_zeta, 0.0}, v.k1,
                               v.k2, b, cfg.step, cfg.horizon);
}

inline PatternReport classify_run(const ScenarioConfig& cfg, ModelKind model) {
  const auto& v = cfg.controller.vot;
  if (model == ModelKind::approximate) {
    const auto states = run_approximate(cfg);
    return classify_pattern(phase_series(states), cfg.tail_window(), v.k1, v.k2);
  }
  ScenarioConfig c = cfg;
  c.controller.kind = ControllerKind::vot;
  return classify_pattern(phase_series(run_closed_loop(c)), cfg.tail_window(), v.k1, v.k2);
}

enum class GainParam { k1, k2 };

inline ScenarioConfig with_gain(ScenarioConfig cfg, GainParam which, double value) {
  (which == GainParam::k1 ? cfg.controller.vot.k1 : cfg.controller.vot.k2) = value;
  return cfg;
}

struct SweepRow {
  double value = 0.0;
  PatternReport report;
};

/// Classifies every grid value. Runs are independent and execute
/// concurrently; results come back in grid order.
inline std::vector<SweepRow> sweep_gain(const ScenarioConfig& cfg, GainParam which,
                                        const std::vector<double>& grid, ModelKind model) {
  std::vector<std::future<PatternReport>> jobs;
  jobs.reserve(grid.size());
  for (double v : grid)
    jobs.push_back(std::async(std::launch::async,
                              [c = with_gain(cfg, which, v), model] { return classify_run(c, model); }));
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid[i], jobs[i].get()});
  return rows;
}

inline double phase_boundary(const ScenarioConfig& cfg, GainParam which, double low, double high,
                             double resolution, ModelKind model) {
  return find_phase_boundary(
      [&](double v) { return classify_run(with_gain(cfg, which, v), model).pattern; }, low, high,
      resolution);
}

}  // namespace hotlane
