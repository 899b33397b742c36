#include <gtest/gtest.h>

#include "hotlane/core_model.hpp"

using namespace hotlane;

namespace {
constexpr Capacities kCaps{30.0, 30.0};
constexpr StepSize kStep{1.0 / 60.0};
}  // namespace

TEST(ResidualCapacity, Examples) {
  EXPECT_DOUBLE_EQ(residual_capacity(30, 10, 20), 0.0);
  EXPECT_DOUBLE_EQ(residual_capacity(30, 30, 0), 0.0);
  EXPECT_DOUBLE_EQ(residual_capacity(30, 10, 30), -10.0);
}

TEST(StepPointQueues, GpQueueGrowsAtNetInflow) {
  const auto next = step_point_queues({0.0, 0.0}, 0.0, 10.0, 60.0, kCaps, kStep);
  EXPECT_DOUBLE_EQ(next.lambda1, 0.0);
  EXPECT_NEAR(next.lambda2, 10.0 / 60.0, 1e-15);
}

TEST(StepPointQueues, HotQueueDrainsByResidualCapacity) {
  const auto next = step_point_queues({1.0, 0.0}, 0.11, 10.0, 60.0, kCaps, kStep);
  EXPECT_NEAR(next.lambda1, 1.0 - 0.11 / 60.0, 1e-15);
  EXPECT_NEAR(next.lambda1, 0.998167, 1e-6);
}

TEST(StepPointQueues, ClipsAtZero) {
  const auto next = step_point_queues({0.001, 0.0}, 0.12, 10.0, 60.0, kCaps, kStep);
  EXPECT_EQ(next.lambda1, 0.0);
}

TEST(StepPointQueues, GpQueueClipsWhenUncongested) {
  // Net GP inflow 10 + 30 + 10 - 60 - 30 < 0 and no queue.
  const auto next = step_point_queues({0.0, 0.0}, -10.0, 10.0, 20.0, kCaps, kStep);
  EXPECT_EQ(next.lambda2, 0.0);
}

TEST(Throughputs, OptimalStateRunsAtCapacity) {
  EXPECT_DOUBLE_EQ(throughputs({0.0, 0.0}, 0.0, 10, 60, kCaps, kStep).g1, 30.0);
}

TEST(Throughputs, ResidualCapacityIsUnused) {
  EXPECT_DOUBLE_EQ(throughputs({0.0, 0.0}, 5.0, 10, 60, kCaps, kStep).g1, 25.0);
}

TEST(Throughputs, CongestedGpDischargesAtCapacity) {
  EXPECT_DOUBLE_EQ(throughputs({0.0, 100.0}, 0.0, 10, 60, kCaps, kStep).g2, 30.0);
}

TEST(Throughputs, QueuedHotLanesDischargeAtCapacity) {
  // Queue plus arrivals exceed what one step can serve.
  EXPECT_DOUBLE_EQ(throughputs({1.0, 0.0}, 0.11, 10, 60, kCaps, kStep).g1, 30.0);
}

TEST(Throughputs, LowerClampOnlyForUnphysicalZeta) {
  // zeta > c1 would need negative arrivals.
  const auto g = throughputs({0.0, 0.0}, 40.0, 0.0, 0.0, kCaps, kStep);
  EXPECT_EQ(g.g1, 0.0);
}

TEST(QueuingTimes, Examples) {
  const auto a = queuing_times({0.0, 0.0}, kCaps);
  EXPECT_EQ(a.w1, 0.0);
  EXPECT_EQ(a.w2, 0.0);
  EXPECT_EQ(a.w, 0.0);

  const auto b = queuing_times({0.0, 200.0}, kCaps);
  EXPECT_NEAR(b.w, 200.0 / 30.0, 1e-12);
  EXPECT_NEAR(b.w, 6.6667, 1e-4);

  const auto c = queuing_times({30.0, 0.0}, kCaps);
  EXPECT_DOUBLE_EQ(c.w, -1.0);
  EXPECT_DOUBLE_EQ(c.w1, 1.0);
}

TEST(CoreModel, ZeroResidualIsStationary) {
  for (double lambda2 : {0.0, 5.0, 250.0}) {
    const QueueState q{0.0, lambda2};
    EXPECT_EQ(step_point_queues(q, 0.0, 10, 60, kCaps, kStep).lambda1, 0.0);
    EXPECT_EQ(throughputs(q, 0.0, 10, 60, kCaps, kStep).g1, kCaps.c1);
  }
}
