#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hotlane/sim_engine.hpp"
#include "support/property_checks.hpp"

using namespace hotlane;

namespace {

constexpr double kDt = 1.0 / 60.0;

ScenarioConfig integral_run() {
  ScenarioConfig c;
  c.controller.kind = ControllerKind::integral;
  c.controller.integral = {std::log(2.0), 0.01, 30.0};
  return c;
}

}  // namespace

TEST(DemandAt, Constant) {
  std::mt19937_64 rng(1);
  const DemandProfile p{};
  for (double t : {0.0, 7.3, 20.0}) {
    const auto [q1, q2] = demand_at(p, t, kDt, rng);
    EXPECT_EQ(q1, 10.0);
    EXPECT_EQ(q2, 60.0);
  }
}

TEST(DemandAt, ZeroConstant) {
  std::mt19937_64 rng(1);
  DemandProfile p;
  p.mean_q1 = p.mean_q2 = 0.0;
  const auto [q1, q2] = demand_at(p, 3.0, kDt, rng);
  EXPECT_EQ(q1, 0.0);
  EXPECT_EQ(q2, 0.0);
}

TEST(DemandAt, PoissonPerStepSampleMean) {
  std::mt19937_64 rng(20240611);
  DemandProfile p;
  p.kind = DemandKind::poisson;
  double sum = 0.0;
  for (int k = 0; k <= 1200; ++k) sum += demand_at(p, k * kDt, kDt, rng).first;
  EXPECT_NEAR(sum / 1201.0, 10.0, 1.5);
}

TEST(DemandAt, PoissonLongRunMean) {
  // 200 min of 1-minute counts: sd of the mean rate is sqrt(10/200) ~ 0.22.
  std::mt19937_64 rng(99);
  DemandProfile p;
  p.kind = DemandKind::poisson;
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto [q1, q2] = demand_at(p, k, 1.0, rng);
    EXPECT_EQ(q1, std::floor(q1));  // integer counts per minute
    s1 += q1;
    s2 += q2;
  }
  EXPECT_NEAR(s1 / 200.0, 10.0, 0.67);
  EXPECT_NEAR(s2 / 200.0, 60.0, 1.65);
}

TEST(DemandAt, TimeseriesStepLookup) {
  std::mt19937_64 rng(1);
  DemandProfile p;
  p.kind = DemandKind::timeseries;
  p.samples = {{0.0, 10.0, 60.0}, {5.0, 12.0, 70.0}, {10.0, 8.0, 50.0}};
  EXPECT_EQ(demand_at(p, 0.0, kDt, rng).first, 10.0);
  EXPECT_EQ(demand_at(p, 4.99, kDt, rng).second, 60.0);
  EXPECT_EQ(demand_at(p, 5.0, kDt, rng).first, 12.0);
  EXPECT_EQ(demand_at(p, 19.0, kDt, rng).second, 50.0);
}

TEST(DemandAt, TimeseriesBeforeFirstSampleIsConfigError) {
  std::mt19937_64 rng(1);
  DemandProfile p;
  p.kind = DemandKind::timeseries;
  p.samples = {{1.0, 10.0, 60.0}};
  EXPECT_THROW(demand_at(p, 0.5, kDt, rng), ConfigError);
}

TEST(DemandGenerator, HoldsPoissonDrawForInterval) {
  DemandProfile p;
  p.kind = DemandKind::poisson;
  p.count_interval = 0.5;
  DemandGenerator gen(p, {kDt});
  std::mt19937_64 rng(5);
  const auto first = gen.at(0, 0.0, rng);
  for (std::size_t k = 1; k < 30; ++k) EXPECT_EQ(gen.at(k, k * kDt, rng), first);
  // The next interval starts a fresh draw from the same stream.
  std::mt19937_64 ref(5);
  demand_at(p, 0.0, 0.5, ref);
  EXPECT_EQ(gen.at(30, 0.5, rng), demand_at(p, 0.5, 0.5, ref));
}

TEST(RunClosedLoop, ReferenceCorridorReachesOptimum) {
  const ScenarioConfig c;
  const Trajectory traj = run_closed_loop(c);
  ASSERT_EQ(traj.states.size(), 1201u);
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    ASSERT_DOUBLE_EQ(traj.states[k].t, k * kDt);
  EXPECT_EQ(traj.states.back().lambda1, 0.0);
  EXPECT_NEAR(traj.states.back().pi, 0.5, 0.01);
  EXPECT_EQ(traj.controller, "vot");
}

TEST(RunClosedLoop, ReachesOptimalStateBeforeHorizon) {
  const Trajectory traj = run_closed_loop(ScenarioConfig{});
  const auto t = settle_time(traj.states, [](const SystemState& s) {
    return std::max(s.lambda1, std::abs(s.zeta)) < 1e-3;
  });
  ASSERT_TRUE(t.has_value());
  EXPECT_LT(*t, 20.0);
}

TEST(RunClosedLoop, IntegralTollQueueKeepsGrowing) {
  const Trajectory traj = run_closed_loop(integral_run());
  const auto& s = traj.states;
  std::size_t checked = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k - 1].t < 10.0 - 1e-9) continue;
    EXPECT_GT(s[k].lambda1, s[k - 1].lambda1) << "t=" << s[k].t;
    ++checked;
  }
  EXPECT_EQ(checked, 600u);
}

TEST(RunClosedLoop, ZeroDemandStaysEmpty) {
  for (auto kind : {ControllerKind::vot, ControllerKind::integral, ControllerKind::selflearning}) {
    ScenarioConfig c;
    c.demand.mean_q1 = c.demand.mean_q2 = 0.0;
    c.controller.kind = kind;
    for (const auto& s : run_closed_loop(c).states) {
      ASSERT_EQ(s.lambda1, 0.0);
      ASSERT_EQ(s.lambda2, 0.0);
      ASSERT_EQ(s.g1, 0.0);
      ASSERT_EQ(s.g2, 0.0);
      ASSERT_EQ(s.q3, 0.0);
    }
  }
}

TEST(RunClosedLoop, ControllerErrorsCarryStepIndex) {
  ScenarioConfig c;
  c.controller.kind = ControllerKind::selflearning;
  c.controller.selflearning.theta = {0.25, 0.0, 0.1};
  try {
    run_closed_loop(c);
    FAIL() << "expected ControllerError";
  } catch (const ControllerError& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos);
  }
}

TEST(RunClosedLoop, LogDomainErrorFromTimeseries) {
  ScenarioConfig c;
  c.demand.kind = DemandKind::timeseries;
  // Total demand drops below HOT capacity at t = 2.
  c.demand.samples = {{0.0, 10.0, 60.0}, {2.0, 10.0, 15.0}};
  try {
    run_closed_loop(c);
    FAIL() << "expected LogDomainError";
  } catch (const LogDomainError& e) {
    EXPECT_EQ(e.step(), 120);
  }
}

TEST(RunClosedLoop, SeedChangesPoissonRunAndFingerprint) {
  ScenarioConfig c;
  c.demand.kind = DemandKind::poisson;
  const auto a = run_closed_loop(c, 1);
  const auto b = run_closed_loop(c, 2);
  EXPECT_NE(a.fingerprint, b.fingerprint);
  bool differs = false;
  for (std::size_t k = 0; k < a.states.size(); ++k) differs |= !(a.states[k] == b.states[k]);
  EXPECT_TRUE(differs);
}

TEST(RunClosedLoop, Deterministic) {
  EXPECT_EQ(checks::check_determinism(checks::noisy_poisson_scenario(7)), "");
}

// lambda2 grows by (q1 + q2 - c1 - c2 + zeta) dt per step while the GP lane
// is congested, so the equilibrium rate holds to 1e-6 per step once
// |zeta| dt < 1e-6.
TEST(RunClosedLoop, GpQueueGrowsAtEquilibriumRate) {
  const ScenarioConfig c;
  const Trajectory traj = run_closed_loop(c);
  const auto& s = traj.states;
  const double excess = 10.0 + 60.0 - 30.0 - 30.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double step = s[k].lambda2 - s[k - 1].lambda2;
    ASSERT_NEAR(step, (excess + s[k - 1].zeta) * kDt, 1e-12) << "t=" << s[k].t;
  }

  const auto zero_queue = summarize(traj, 0.5).time_to_zero_queue;
  const auto settled =
      settle_time(s, [](const SystemState& x) { return std::abs(x.zeta) * kDt < 1e-6; });
  ASSERT_TRUE(zero_queue && settled);
  EXPECT_LT(*settled, 10.0);
  double worst = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k - 1].t < *settled - 1e-12) continue;
    worst = std::max(worst, std::abs(s[k].lambda2 - s[k - 1].lambda2 - excess * kDt));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Summarize, ReferenceCorridor) {
  const auto m = summarize(run_closed_loop(ScenarioConfig{}), 0.5);
  EXPECT_NEAR(m.avg_g1, 29.96, 0.05);
  EXPECT_NEAR(m.final_u, 4.024, 0.05);
  EXPECT_NEAR(m.final_pi, 0.5, 0.01);
  EXPECT_EQ(m.final_lambda1, 0.0);
  ASSERT_TRUE(m.time_to_zero_queue.has_value());
  EXPECT_GT(*m.time_to_zero_queue, 0.0);
  EXPECT_LT(*m.time_to_zero_queue, 10.0);
  EXPECT_LT(m.pi_rmse_tail, 1e-6);
  EXPECT_EQ(m.negative_price_steps, 0u);
}

TEST(Summarize, AllZeroTrajectory) {
  Trajectory traj;
  for (int k = 0; k <= 60; ++k) {
    SystemState s;
    s.t = k * kDt;
    traj.states.push_back(s);
  }
  const auto m = summarize(traj, 0.0);
  EXPECT_EQ(m.avg_g1, 0.0);
  EXPECT_EQ(m.final_u, 0.0);
  EXPECT_EQ(m.final_pi, 0.0);
  EXPECT_EQ(m.max_lambda1, 0.0);
  EXPECT_EQ(m.final_lambda1, 0.0);
  ASSERT_TRUE(m.time_to_zero_queue.has_value());
  EXPECT_EQ(*m.time_to_zero_queue, 0.0);
  EXPECT_EQ(m.pi_rmse_tail, 0.0);
}

TEST(Summarize, QueueStillPresentAtEnd) {
  const auto m = summarize(run_closed_loop(integral_run()), 0.5);
  EXPECT_FALSE(m.time_to_zero_queue.has_value());
  EXPECT_GT(m.final_lambda1, 0.0);
  EXPECT_TRUE(std::isnan(m.final_pi));
}

TEST(SettleTime, Examples) {
  std::vector<SystemState> s(5);
  for (int i = 0; i < 5; ++i) s[i].t = i;
  s[1].lambda1 = 1.0;
  const auto pred = [](const SystemState& x) { return x.lambda1 == 0.0; };
  EXPECT_EQ(settle_time(s, pred), 2.0);
  s[4].lambda1 = 1.0;
  EXPECT_FALSE(settle_time(s, pred).has_value());
  EXPECT_FALSE(settle_time({}, pred).has_value());
}
