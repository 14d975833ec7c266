#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace agvsim {

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Which wheel drives positive rotation. kLeftMinusRight keeps
/// omega = (v_l - v_r) / rho; kRightMinusLeft is the usual robotics form.
enum class OmegaConvention { kLeftMinusRight, kRightMinusLeft };

/// Chassis geometry. Offsets are relative to the chassis center; only `rho`
/// enters the kinematics, the rest is kept for completeness.
struct AgvGeometry {
  double rho{1.2};
  double wheel_radius{0.2};
  Vec2 left_center{-0.5, 0.6};
  Vec2 right_center{-0.5, -0.6};
  Vec2 mass_center{-0.23, 0.0};
  OmegaConvention omega_convention{OmegaConvention::kLeftMinusRight};

  void validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("geometry.rho must be > 0");
    if (!(wheel_radius > 0.0))
      throw std::invalid_argument("geometry.wheel_radius must be > 0");
    if (std::abs(distance(left_center, right_center) - rho) > 1e-9)
      throw std::invalid_argument(
          "geometry: distance between wheel centers must equal rho");
  }
};

struct Pose {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Twist {
  double v{0.0};
  double omega{0.0};

  friend bool operator==(const Twist&, const Twist&) = default;
};

struct WheelSpeeds {
  double v_l{0.0};
  double v_r{0.0};

  friend bool operator==(const WheelSpeeds&, const WheelSpeeds&) = default;
};

struct Arena {
  double half_extent_x{20.0};
  double half_extent_y{20.0};
  bool walls_enabled{true};

  void validate() const {
    if (!(half_extent_x > 0.0) || !(half_extent_y > 0.0))
      throw std::invalid_argument("arena half extents must be > 0");
  }
};

inline Twist twist_from_wheels(const WheelSpeeds& w, const AgvGeometry& geom) {
  const double diff = geom.omega_convention == OmegaConvention::kLeftMinusRight
                          ? w.v_l - w.v_r
                          : w.v_r - w.v_l;
  return {(w.v_l + w.v_r) / 2.0, diff / geom.rho};
}

inline WheelSpeeds wheels_from_twist(const Twist& t, const AgvGeometry& geom) {
  const double half = t.omega * geom.rho / 2.0;
  if (geom.omega_convention == OmegaConvention::kLeftMinusRight)
    return {t.v + half, t.v - half};
  return {t.v - half, t.v + half};
}

/// Below this |omega| the straight-line update is used.
inline constexpr double kStraightLineOmega = 1e-9;

/// Exact unicycle update under a constant twist held for `dt` seconds.
inline Pose integrate(const Pose& p, const Twist& cmd, double dt) {
  if (!(dt > 0.0)) {
    if (dt == 0.0) return p;
    throw std::invalid_argument("integrate: dt must be > 0");
  }
  Pose out = p;
  if (std::abs(cmd.omega) < kStraightLineOmega) {
    out.x += cmd.v * dt * std::cos(p.theta);
    out.y += cmd.v * dt * std::sin(p.theta);
    out.theta = wrap_angle(p.theta);
    return out;
  }
  // (v/w)(sin th' - sin th) rewritten with the half-angle identity; stays
  // accurate when w*dt is small.
  const double half_turn = 0.5 * cmd.omega * dt;
  const double chord = cmd.v * dt * std::sin(half_turn) / half_turn;
  out.x += chord * std::cos(p.theta + half_turn);
  out.y += chord * std::sin(p.theta + half_turn);
  out.theta = wrap_angle(p.theta + cmd.omega * dt);
  return out;
}

/// Clamps the position into the walled rectangle. Heading is untouched, so
/// an AGV pushing into a wall slides along it.
inline std::pair<Pose, bool> clamp_to_arena(const Pose& p, const Arena& arena) {
  if (!arena.walls_enabled) return {p, false};
  Pose out = p;
  out.x = std::clamp(p.x, -arena.half_extent_x, arena.half_extent_x);
  out.y = std::clamp(p.y, -arena.half_extent_y, arena.half_extent_y);
  return {out, out.x != p.x || out.y != p.y};
}

}  // namespace agvsim
