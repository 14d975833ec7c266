#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "agvsim/controller.hpp"

using namespace agvsim;
constexpr double kPi = std::numbers::pi;

namespace {

// A path whose point at t + tau is (20, 0) for t = 0, tau = pi/2.
EightPath unit_rate_path() { return {20, 20, 1.0, 0.0}; }
constexpr double kTauToTip = kPi / 2;

ControllerConfig p_only(double kp_lin, double kp_ang, double omega_max = 1.5) {
  ControllerConfig c;
  c.gains_linear = {kp_lin, 0, 0};
  c.gains_angular = {kp_ang, 0, 0};
  c.tau = kTauToTip;
  c.v_max = 10;
  c.omega_max = omega_max;
  return c;
}

}  // namespace

TEST(TrackingErrors, Examples) {
  const EightPath path = unit_rate_path();
  const TrackingError ahead = tracking_errors({0, 0, 0}, path, 0, kTauToTip);
  EXPECT_NEAR(ahead.theta_e, 0, 1e-12);
  EXPECT_NEAR(ahead.d_e, 20, 1e-12);

  const TrackingError left = tracking_errors({20, -20, 0}, path, 0, kTauToTip);
  EXPECT_NEAR(left.theta_e, kPi / 2, 1e-12);
  EXPECT_NEAR(left.d_e, 20, 1e-12);

  const TrackingError on_target = tracking_errors({20, 0, 1.0}, path, 0, kTauToTip, 1e-9);
  EXPECT_EQ(on_target.theta_e, 0.0);
  EXPECT_NEAR(on_target.d_e, 0, 1e-12);
}

TEST(TrackingErrors, WrappedAndInvariantToFullTurns) {
  const EightPath path;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-30, 30), th(-kPi, kPi), t(0, 62);
  for (int i = 0; i < 5000; ++i) {
    const Pose p{u(rng), u(rng), th(rng)};
    const double now = t(rng);
    const TrackingError a = tracking_errors(p, path, now, 2.0);
    const TrackingError b = tracking_errors({p.x, p.y, p.theta + 2 * kPi}, path, now, 2.0);
    EXPECT_GT(a.theta_e, -kPi);
    EXPECT_LE(a.theta_e, kPi);
    EXPECT_NEAR(a.theta_e, b.theta_e, 1e-9);
    EXPECT_EQ(a.d_e, b.d_e);
  }
}

TEST(Pid, ProportionalExample) {
  EXPECT_DOUBLE_EQ(pid_step({2, 0, 0}, {}, 3, 0.1).output, 6);
}

TEST(Pid, IntegralExample) {
  const PidGains g{0, 1, 0};
  const PidResult a = pid_step(g, {}, 1, 0.5);
  const PidResult b = pid_step(g, a.state, 1, 0.5);
  EXPECT_DOUBLE_EQ(a.output, 0.5);
  EXPECT_DOUBLE_EQ(b.output, 1.0);
}

TEST(Pid, DerivativeExample) {
  const PidGains g{0, 0, 1};
  const PidResult a = pid_step(g, {}, 0, 0.1);
  const PidResult b = pid_step(g, a.state, 1, 0.1);
  EXPECT_DOUBLE_EQ(a.output, 0);
  EXPECT_NEAR(b.output, 10, 1e-12);
}

TEST(Pid, DerivativeIsZeroOnFirstCall) {
  EXPECT_DOUBLE_EQ(pid_step({0, 0, 5}, {}, 42, 0.1).output, 0.0);
}

TEST(Pid, AntiWindupClampsIntegral) {
  PidState s;
  for (int i = 0; i < 100; ++i) s = pid_step({0, 2, 0}, s, 10, 1, 1.5).state;
  EXPECT_DOUBLE_EQ(s.integral, 1.5);
  for (int i = 0; i < 100; ++i) s = pid_step({0, 2, 0}, s, -10, 1, 1.5).state;
  EXPECT_DOUBLE_EQ(s.integral, -1.5);
}

TEST(Pid, RejectsNonPositiveDt) {
  EXPECT_THROW(pid_step({1, 0, 0}, {}, 1, 0), std::invalid_argument);
}

TEST(Pid, LinearInErrorWithoutWindup) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5, 5), g(0, 3), dt(0.01, 1);
  for (int i = 0; i < 2000; ++i) {
    const PidGains gains{g(rng), g(rng), g(rng)};
    const double e1 = u(rng), e2 = u(rng), alpha = u(rng), h = dt(rng);
    // Scale the whole history, state included.
    const PidResult a1 = pid_step(gains, {}, e1, h);
    const PidResult a2 = pid_step(gains, a1.state, e2, h);
    const PidResult b1 = pid_step(gains, {}, alpha * e1, h);
    const PidResult b2 = pid_step(gains, b1.state, alpha * e2, h);
    EXPECT_NEAR(b1.output, alpha * a1.output, 1e-9);
    EXPECT_NEAR(b2.output, alpha * a2.output, 1e-9);
  }
}

TEST(Pid, ZeroErrorFixedPoint) {
  const PidGains g{1.3, 0.7, 0.4};
  PidState s;
  for (int i = 0; i < 50; ++i) {
    const PidResult r = pid_step(g, s, 0.0, 0.02);
    EXPECT_EQ(r.output, 0.0);
    s = r.state;
  }
  // A leftover integral is all that survives a zero-error stream.
  s.integral = 0.25;
  PidResult r;
  for (int i = 0; i < 10; ++i) {
    r = pid_step(g, s, 0.0, 0.02);
    s = r.state;
  }
  EXPECT_DOUBLE_EQ(r.output, 0.7 * 0.25);
}

TEST(Gains, Validation) {
  EXPECT_NO_THROW((PidGains{1, 0, 0}).validate("x"));
  EXPECT_THROW((PidGains{-1, 0, 0}).validate("x"), std::invalid_argument);
  EXPECT_THROW((PidGains{1, NAN, 0}).validate("x"), std::invalid_argument);
  ControllerConfig c;
  c.omega_max = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ControlStep, NoSampleMeansStandStill) {
  ControllerState st;
  EXPECT_EQ(control_step(ControllerConfig{}, EightPath{}, st, std::nullopt, 1.0), (Twist{0, 0}));
}

TEST(ControlStep, ProportionalExample) {
  ControllerState st;
  const Twist cmd = control_step(p_only(0.1, 1), unit_rate_path(), st,
                                 PoseSample{{0, 0, 0}, 0.0}, 0.0);
  EXPECT_NEAR(cmd.v, 2.0, 1e-12);
  EXPECT_NEAR(cmd.omega, 0.0, 1e-12);
}

TEST(ControlStep, BackwardsHeadingSaturates) {
  // theta_e = 0 - pi wraps to +pi, so the command saturates at +omega_max.
  ControllerState st;
  const Twist cmd = control_step(p_only(0.1, 1, 1.0), unit_rate_path(), st,
                                 PoseSample{{0, 0, kPi}, 0.0}, 0.0);
  EXPECT_DOUBLE_EQ(cmd.omega, 1.0);
}

TEST(ControlStep, AtTargetCommandsNothing) {
  ControllerState st;
  ControllerConfig c = p_only(0.5, 1.5);
  c.gains_linear.ki = 0.3;
  c.gains_angular.ki = 0.3;
  const Twist cmd = control_step(c, unit_rate_path(), st, PoseSample{{20, 0, 0.4}, 0.0}, 0.0);
  EXPECT_NEAR(cmd.v, 0, 1e-12);
  EXPECT_EQ(cmd.omega, 0.0);
}

TEST(ControlStep, UsesSampleStampNotArrival) {
  const EightPath path;
  const ControllerConfig c = p_only(0.3, 1.0);
  ControllerState a, b;
  const PoseSample s{{1, 2, 0.1}, 3.0};
  const Twist late = control_step(c, path, a, s, 3.5);
  const Twist fresh = control_step(c, path, b, s, 3.0);
  EXPECT_EQ(late, fresh);
  EXPECT_THROW(control_step(c, path, a, PoseSample{{}, 9.0}, 4.0), std::invalid_argument);
}

TEST(ControlStep, ReverseOnlyWhenAllowed) {
  ControllerConfig c = p_only(1, 0);
  Twist raw{-3, 0};
  EXPECT_EQ(saturate(raw, c).v, 0.0);
  c.allow_reverse = true;
  EXPECT_EQ(saturate(raw, c).v, -3.0);
}

TEST(ControlStep, ProjectedDistance) {
  ControllerConfig c = p_only(1.0, 0.0);
  c.project_de = true;
  c.allow_reverse = true;
  ControllerState st;
  // Target straight left: cos(theta_e) = 0, so no forward push.
  const Twist cmd = control_step(c, unit_rate_path(), st, PoseSample{{20, -5, 0}, 0.0}, 0.0);
  EXPECT_NEAR(cmd.v, 0.0, 1e-12);
}

TEST(ControlStep, SaturationHoldsForRandomInputs) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-40, 40), th(-kPi, kPi), g(0, 5);
  const EightPath path;
  for (int i = 0; i < 3000; ++i) {
    ControllerConfig c;
    c.gains_linear = {g(rng), g(rng), g(rng)};
    c.gains_angular = {g(rng), g(rng), g(rng)};
    c.allow_reverse = i % 2 == 0;
    ControllerState st;
    double now = 0;
    for (int k = 0; k < 5; ++k) {
      now += 0.1;
      const Twist cmd =
          control_step(c, path, st, PoseSample{{u(rng), u(rng), th(rng)}, now}, now);
      EXPECT_LE(std::abs(cmd.v), c.v_max);
      EXPECT_LE(std::abs(cmd.omega), c.omega_max);
      if (!c.allow_reverse) {
        EXPECT_GE(cmd.v, 0.0);
      }
    }
  }
}

TEST(ControlStep, Deterministic) {
  const ControllerConfig c;
  ControllerState a, b;
  for (int k = 1; k <= 20; ++k) {
    const PoseSample s{{0.3 * k, -0.1 * k, 0.05 * k}, 0.5 * k};
    EXPECT_EQ(control_step(c, EightPath{}, a, s, 0.5 * k), control_step(c, EightPath{}, b, s, 0.5 * k));
  }
}

TEST(Controller, KeepsNewestSampleOnly) {
  Controller ctl(ControllerConfig{}, EightPath{});
  EXPECT_TRUE(ctl.on_pose({{1, 0, 0}, 1.0}));
  EXPECT_FALSE(ctl.on_pose({{2, 0, 0}, 0.5}));
  EXPECT_FALSE(ctl.on_pose({{3, 0, 0}, 1.0}));
  EXPECT_EQ(ctl.latest()->pose.x, 1.0);
  EXPECT_TRUE(ctl.on_pose({{4, 0, 0}, 1.5}));
  EXPECT_EQ(ctl.latest()->pose.x, 4.0);
}
