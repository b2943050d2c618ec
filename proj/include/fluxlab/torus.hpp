#pragma once

#include <cmath>

namespace fluxlab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Canonical representative of an angle in (-pi, pi].
inline double wrap_angle(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Distance on the circle of circumference 2*pi, in [0, pi].
inline double torus_distance(double x, double y) {
  return std::abs(std::remainder(x - y, kTwoPi));
}

// Membership in the circle with symmetric windows of half-width b removed
// around 0 and pi. Angles here avoid both the trivial and the maximally
// frustrated flux.
inline bool in_flux_band(double x, double b) {
  return torus_distance(x, 0.0) >= b && torus_distance(x, kPi) >= b;
}

}  // namespace fluxlab
