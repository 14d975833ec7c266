#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "agvsim/world.hpp"

namespace agvsim {

/// Eight-shaped reference path
///   x*(t) = A sin(kt + phase),  y*(t) = B sin(kt + phase) cos(kt + phase).
/// With k = 1 this is the literal curve in seconds; the default k traverses
/// one full eight in 62 s.
struct EightPath {
  double amplitude_x{20.0};
  double amplitude_y{20.0};
  double rate{2.0 * std::numbers::pi / 62.0};
  double phase{0.0};

  double period() const { return 2.0 * std::numbers::pi / rate; }

  void validate() const {
    if (!(amplitude_x > 0.0) || !(amplitude_y > 0.0))
      throw std::invalid_argument("path amplitudes must be > 0");
    if (!(rate > 0.0)) throw std::invalid_argument("path.rate must be > 0");
    if (!std::isfinite(phase)) throw std::invalid_argument("path.phase must be finite");
  }
};

inline Vec2 reference_point(const EightPath& path, double t) {
  const double s = path.rate * t + path.phase;
  const double sin_s = std::sin(s);
  return {path.amplitude_x * sin_s, path.amplitude_y * sin_s * std::cos(s)};
}

inline Vec2 reference_velocity(const EightPath& path, double t) {
  const double s = path.rate * t + path.phase;
  return {path.amplitude_x * path.rate * std::cos(s),
          path.amplitude_y * path.rate * std::cos(2.0 * s)};
}

}  // namespace agvsim
