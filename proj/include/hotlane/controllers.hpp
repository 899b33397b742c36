#pragma once

// Pricing controllers. Each one quotes a toll from what the operator can
// measure at the start of a step, then observes the outcome of that step.
//
//   VotController           integral estimator of the average value of time
//                           feeding a logit-inverting price law
//   IntegralTollController  integral action directly on the toll, driven by
//                           the HOT-lane demand error
//   SelfLearningController  Kalman filter over willingness-to-pay parameters
//                           (alpha1, alpha2, gamma) with the logit inverted for
//                           a target paying demand

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <sstream>
#include <string>
#include <utility>
#include <variant>

#include "hotlane/core_model.hpp"
#include "hotlane/errors.hpp"

namespace hotlane {

struct QuoteInput {
  double t = 0.0;
  double w = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double c1 = 30.0;
};

struct Observation {
  double lambda1 = 0.0;
  double zeta = 0.0;
  double w = 0.0;
  double u = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  StepSize step{};
};

template <class C>
concept PricingController = requires(C c, const C cc, const QuoteInput& in, const Observation& ob) {
  { cc.quote(in) } -> std::convertible_to<double>;
  c.observe(ob);
  { cc.vot_estimate() } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// VOT-estimating I-controller

struct VotEstimatorState {
  double pi = 0.25;  // estimated average VOT, $/min
  double k1 = 0.1;   // gain on the HOT queue
  double k2 = 0.1;   // gain on the residual capacity
  double alpha_guess = 1.0;
};

/// Explicit Euler step of d(pi)/dt = k1 lambda1 - k2 zeta.
constexpr VotEstimatorState vot_update(VotEstimatorState s, double lambda1, double zeta,
                                       StepSize step) noexcept {
  s.pi += step.dt * (s.k1 * lambda1 - s.k2 * zeta);
  return s;
}

/// u = pi w + ln((q1 + q2 - c1) / (c1 - q1)) / alpha_guess.
/// Throws LogDomainError unless q1 < c1 < q1 + q2.
inline double vot_price(const VotEstimatorState& s, double w, double q1, double q2, double c1) {
  const double num = q1 + q2 - c1;
  const double den = c1 - q1;
  if (!(num > 0.0) || !(den > 0.0)) {
    std::ostringstream msg;
    msg << "price law undefined: need q1 < c1 < q1 + q2 (q1=" << q1 << ", q2=" << q2
        << ", c1=" << c1 << ")";
    throw LogDomainError(msg.str());
  }
  return s.pi * w + std::log(num / den) / s.alpha_guess;
}

class VotController {
 public:
  VotController() = default;
  explicit VotController(VotEstimatorState s) : state_(s) {}

  double quote(const QuoteInput& in) const { return vot_price(state_, in.w, in.q1, in.q2, in.c1); }
  void observe(const Observation& ob) { state_ = vot_update(state_, ob.lambda1, ob.zeta, ob.step); }
  double vot_estimate() const noexcept { return state_.pi; }
  const VotEstimatorState& state() const noexcept { return state_; }

 private:
  VotEstimatorState state_{};
};

// ---------------------------------------------------------------------------
// Integral toll baseline

struct IntegralTollState {
  double u = 0.6931471805599453;  // ln 2
  double k_i = 0.01;
  double target_q_hot = 30.0;
};

/// u' = u + k_i (q_hot - target). Applied once per step, not scaled by dt.
constexpr IntegralTollState integral_toll_update(IntegralTollState s, double q_hot) noexcept {
  s.u += s.k_i * (q_hot - s.target_q_hot);
  return s;
}

class IntegralTollController {
 public:
  IntegralTollController() = default;
  explicit IntegralTollController(IntegralTollState s) : state_(s) {}

  double quote(const QuoteInput&) const noexcept { return state_.u; }
  // HOT demand is HOVs plus paying SOVs.
  void observe(const Observation& ob) { state_ = integral_toll_update(state_, ob.q1 + ob.q3); }
  double vot_estimate() const noexcept { return std::nan(""); }
  const IntegralTollState& state() const noexcept { return state_; }

 private:
  IntegralTollState state_{};
};

// ---------------------------------------------------------------------------
// Self-learning Kalman baseline

struct SelfLearningState {
  Eigen::Vector3d theta{0.25, 1.0, 0.1};  // [alpha1, alpha2, gamma]
  Eigen::Matrix3d covariance = 0.1 * Eigen::Matrix3d::Identity();
  double r = 0.09;
  Eigen::Matrix3d q_proc = 1e-6 * Eigen::Matrix3d::Identity();
  double target_paying = 20.0;
};

inline constexpr double kMinPriceCoefficient = 1e-6;

/// One predict/update cycle on the observation
///   y = ln((q2 - q3) / q3) = -alpha1 w + alpha2 u + gamma.
/// q3 is clamped into [d, q2 - d], d = 1e-6 q2. No-op on the update when
/// q2 <= 0 since there is nothing to observe.
inline SelfLearningState self_learning_observe(SelfLearningState s, double q2, double q3, double w,
                                               double u) {
  s.covariance += s.q_proc;
  if (!(q2 > 0.0)) return s;

  const double d = 1e-6 * q2;
  q3 = std::clamp(q3, d, q2 - d);
  const double y = std::log((q2 - q3) / q3);
  const Eigen::RowVector3d h(-w, u, 1.0);

  const double innovation = y - h.dot(s.theta);
  const double var = (h * s.covariance * h.transpose())(0, 0) + s.r;
  const Eigen::Vector3d gain = s.covariance * h.transpose() / var;
  s.theta += gain * innovation;

  // Joseph form keeps the covariance symmetric PSD under rounding.
  const Eigen::Matrix3d i_kh = Eigen::Matrix3d::Identity() - gain * h;
  s.covariance = i_kh * s.covariance * i_kh.transpose() + s.r * gain * gain.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  return s;
}

/// u = (ln((q2 - target) / target) + alpha1 w - gamma) / alpha2.
inline double self_learning_price(const SelfLearningState& s, double q2, double w) {
  const double alpha2 = s.theta[1];
  if (!(std::abs(alpha2) >= kMinPriceCoefficient)) {
    std::ostringstream msg;
    msg << "price undefined: estimated price coefficient alpha2=" << alpha2 << " is near zero";
    throw ControllerError(msg.str());
  }
  if (!(s.target_paying > 0.0) || !(s.target_paying < q2)) {
    std::ostringstream msg;
    msg << "price law undefined: need 0 < target paying demand (" << s.target_paying
        << ") < q2 (" << q2 << ")";
    throw LogDomainError(msg.str());
  }
  return (std::log((q2 - s.target_paying) / s.target_paying) + s.theta[0] * w - s.theta[2]) /
         alpha2;
}

class SelfLearningController {
 public:
  SelfLearningController() = default;
  explicit SelfLearningController(SelfLearningState s) : state_(std::move(s)) {}

  // Targets the paying demand that exactly fills the HOT lanes, c1 - q1.
  double quote(const QuoteInput& in) const {
    SelfLearningState s = state_;
    s.target_paying = in.c1 - in.q1;
    return self_learning_price(s, in.q2, in.w);
  }
  void observe(const Observation& ob) {
    state_ = self_learning_observe(std::move(state_), ob.q2, ob.q3, ob.w, ob.u);
  }
  /// alpha1 / alpha2 is the implied value of time.
  double vot_estimate() const noexcept { return state_.theta[0] / state_.theta[1]; }
  const SelfLearningState& state() const noexcept { return state_; }

 private:
  SelfLearningState state_{};
};

// ---------------------------------------------------------------------------

using AnyController = std::variant<VotController, IntegralTollController, SelfLearningController>;

static_assert(PricingController<VotController>);
static_assert(PricingController<IntegralTollController>);
static_assert(PricingController<SelfLearningController>);

inline std::string controller_name(const AnyController& c) {
  switch (c.index()) {
    case 0: return "vot";
    case 1: return "integral";
    default: return "selflearning";
  }
}

}  // namespace hotlane
