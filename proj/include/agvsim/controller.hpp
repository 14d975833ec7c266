#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "agvsim/trajectory.hpp"
#include "agvsim/world.hpp"

namespace agvsim {

struct PidGains {
  double kp{0.0};
  double ki{0.0};
  double kd{0.0};

  void validate(const std::string& where) const {
    for (double g : {kp, ki, kd}) {
      if (!std::isfinite(g) || g < 0.0)
        throw std::invalid_argument(where + ": PID gains must be finite and >= 0");
    }
  }
  friend bool operator==(const PidGains&, const PidGains&) = default;
};

struct PidState {
  double integral{0.0};
  double prev_error{0.0};
  bool initialized{false};
};

struct PidResult {
  double output{0.0};
  PidState state;
};

/// One PID update. The integral is clamped to +/-`integral_bound`; the
/// derivative term is zero on the first call.
inline PidResult pid_step(const PidGains& g, const PidState& s, double error, double dt,
                          double integral_bound = std::numeric_limits<double>::infinity()) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");
  PidState next = s;
  next.integral = std::clamp(s.integral + error * dt, -integral_bound, integral_bound);
  const double derivative = s.initialized ? (error - s.prev_error) / dt : 0.0;
  next.prev_error = error;
  next.initialized = true;
  return {g.kp * error + g.ki * next.integral + g.kd * derivative, next};
}

/// When the controller computes a new command.
enum class ControlTrigger {
  kPeriodic,  // every `period`, reusing the newest pose received so far
  kOnPose,    // once per newly received pose sample
};

struct ControllerConfig {
  PidGains gains_linear{0.51, 0.0, 0.0};
  PidGains gains_angular{0.44, 0.272, 0.0};
  double tau{2.0};
  double period{1.0};  // kPeriodic tick; kOnPose only uses it as the first dt
  double v_max{3.4};
  double omega_max{0.67};
  double d_tol{1e-6};
  bool allow_reverse{false};
  bool project_de{false};
  ControlTrigger trigger{ControlTrigger::kOnPose};

  void validate() const {
    gains_linear.validate("controller.linear");
    gains_angular.validate("controller.angular");
    if (!(tau >= 0.0)) throw std::invalid_argument("controller.tau must be >= 0");
    if (!(period > 0.0)) throw std::invalid_argument("controller.period must be > 0");
    if (!(v_max > 0.0)) throw std::invalid_argument("controller.v_max must be > 0");
    if (!(omega_max > 0.0)) throw std::invalid_argument("controller.omega_max must be > 0");
    if (!(d_tol >= 0.0)) throw std::invalid_argument("controller.d_tol must be >= 0");
  }
};

struct TrackingError {
  double theta_e{0.0};
  double d_e{0.0};
};

/// Heading and distance errors towards the reference point `tau` seconds
/// ahead of `t`. Below `d_tol` the bearing is undefined and theta_e is 0.
inline TrackingError tracking_errors(const Pose& p, const EightPath& path, double t, double tau,
                                     double d_tol = 1e-9) {
  const Vec2 target = reference_point(path, t + tau);
  const Vec2 delta = target - p.position();
  const double d_e = norm(delta);
  if (d_e < d_tol) return {0.0, d_e};
  return {wrap_angle(std::atan2(delta.y, delta.x) - p.theta), d_e};
}

/// A pose measurement and the simulated time it was taken.
struct PoseSample {
  Pose pose;
  double stamp{0.0};
};

struct ControllerState {
  PidState linear;
  PidState angular;
  std::optional<double> last_step;
};

inline Twist saturate(const Twist& cmd, const ControllerConfig& cfg) {
  const double v_min = cfg.allow_reverse ? -cfg.v_max : 0.0;
  return {std::clamp(cmd.v, v_min, cfg.v_max),
          std::clamp(cmd.omega, -cfg.omega_max, cfg.omega_max)};
}

/// Computes one command from the newest pose sample. Errors are evaluated at
/// the sample's own timestamp, so a stale sample aims at a stale target.
/// Without any sample the vehicle is told to stand still.
inline Twist control_step(const ControllerConfig& cfg, const EightPath& path, ControllerState& state,
                          const std::optional<PoseSample>& sample, double now) {
  if (!sample) return {};
  if (sample->stamp > now + 1e-12)
    throw std::invalid_argument("control_step: pose sample is from the future");

  double dt = cfg.period;
  if (state.last_step && now > *state.last_step) dt = now - *state.last_step;
  state.last_step = now;

  const TrackingError err = tracking_errors(sample->pose, path, sample->stamp, cfg.tau, cfg.d_tol);
  const double linear_error = cfg.project_de ? err.d_e * std::cos(err.theta_e) : err.d_e;

  const auto bound = [](double limit, double ki) {
    return ki > 0.0 ? limit / ki : std::numeric_limits<double>::infinity();
  };
  const PidResult lin = pid_step(cfg.gains_linear, state.linear, linear_error, dt,
                                 bound(cfg.v_max, cfg.gains_linear.ki));
  const PidResult ang = pid_step(cfg.gains_angular, state.angular, err.theta_e, dt,
                                 bound(cfg.omega_max, cfg.gains_angular.ki));
  state.linear = lin.state;
  state.angular = ang.state;
  return saturate({lin.output, ang.output}, cfg);
}

/// Single-owner controller node: remembers the newest pose sample (by stamp)
/// and produces commands on demand.
class Controller {
 public:
  Controller(ControllerConfig cfg, EightPath path) : cfg_(cfg), path_(path) {}

  /// Returns true if the sample is newer than anything seen so far.
  bool on_pose(const PoseSample& s) {
    if (latest_ && s.stamp <= latest_->stamp) return false;
    latest_ = s;
    return true;
  }

  Twist step(double now) { return control_step(cfg_, path_, state_, latest_, now); }

  const std::optional<PoseSample>& latest() const { return latest_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  EightPath path_;
  ControllerState state_;
  std::optional<PoseSample> latest_;
};

}  // namespace agvsim
