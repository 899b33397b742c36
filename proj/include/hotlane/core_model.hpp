#pragma once

// Point-queue dynamics of the HOT / GP lane pair, written in terms of the
// residual capacity zeta = c1 - q1 - q3 of the HOT lanes.
//
// Units: flows in veh/min, queues in veh, times in min.

#include <algorithm>

namespace hotlane {

struct Capacities {
  double c1 = 30.0;  // HOT lanes
  double c2 = 30.0;  // GP lanes
};

struct QueueState {
  double lambda1 = 0.0;  // HOT queue
  double lambda2 = 0.0;  // GP queue
};

struct Throughputs {
  double g1 = 0.0;
  double g2 = 0.0;
};

struct TimingState {
  double w1 = 0.0;  // HOT queuing time
  double w2 = 0.0;  // GP queuing time
  double w = 0.0;   // w2 - w1, may be negative
};

/// Simulation step. Also stands in for the relaxation constant of the
/// continuous-time queue equations.
struct StepSize {
  double dt = 1.0 / 60.0;
};

constexpr double residual_capacity(double c1, double q1, double q3) noexcept {
  return c1 - q1 - q3;
}

/// One explicit step of both point queues, clipped at zero.
constexpr QueueState step_point_queues(const QueueState& q, double zeta, double q1, double q2,
                                       const Capacities& caps, StepSize step) noexcept {
  const double dt = step.dt;
  return {
      std::max(-zeta * dt + q.lambda1, 0.0),
      std::max((q1 + q2 - caps.c2 - caps.c1 + zeta) * dt + q.lambda2, 0.0),
  };
}

/// Discharge rates over the step that starts at state q. Clamped into
/// [0, capacity]; the lower clamp only matters for extreme zeta.
constexpr Throughputs throughputs(const QueueState& q, double zeta, double q1, double q2,
                                  const Capacities& caps, StepSize step) noexcept {
  const double dt = step.dt;
  const double g1 = std::min(caps.c1 - zeta + q.lambda1 / dt, caps.c1);
  const double g2 = std::min(q1 + q2 - caps.c1 + zeta + q.lambda2 / dt, caps.c2);
  return {std::max(g1, 0.0), std::max(g2, 0.0)};
}

constexpr TimingState queuing_times(const QueueState& q, const Capacities& caps) noexcept {
  const double w1 = q.lambda1 / caps.c1;
  const double w2 = q.lambda2 / caps.c2;
  return {w1, w2, w2 - w1};
}

}  // namespace hotlane
