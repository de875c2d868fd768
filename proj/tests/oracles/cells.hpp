#pragma once

#include <cmath>
#include <cstdint>

namespace oracle {

// Lines from O_0 to O_{xi'+N xi} through an open corridor, with the disks
// in between treated as chords across the strip. In offset coordinates the
// admissible set is a quadrilateral of area d^2/((N-1)(N-2)); dividing by the
// run length N|xi| and 4 pi sigma gives the cell measure once d/N < 2 sigma.
inline double long_cell_measure(double d, double xi_len, std::int64_t N, double sigma) {
  const long double n = static_cast<long double>(N);
  return static_cast<double>(static_cast<long double>(d) * d /
                             (4.0L * 3.14159265358979323846L * sigma * xi_len * n * (n - 1) * (n - 2)));
}

// Cross tangent of two radius-sigma circles, the first at the origin and the
// second at (-L, H), found by bisection on the tangency angle b: the line
// touches the first circle at sigma (sin b, cos b) and keeps the second circle
// on the far side at distance sigma.
inline long double cross_tangent_angle(long double L, long double H, long double sigma) {
  auto excess = [&](long double b) {
    return -L * std::sin(b) + H * std::cos(b) - 2 * sigma;
  };
  long double lo = 0, hi = std::atan2(H, L);
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// Angle between a line of slope -tan(a) through (x0, y0) and the tangent of
// the origin circle where the line first enters it.
inline long double entry_grazing_angle(long double a, long double x0, long double y0,
                                       long double sigma) {
  const long double vx = std::cos(a), vy = -std::sin(a);
  const long double b = x0 * vx + y0 * vy;
  const long double c = x0 * x0 + y0 * y0 - sigma * sigma;
  const long double s = -b - std::sqrt(b * b - c);
  const long double px = x0 + s * vx, py = y0 + s * vy;
  const long double cos_inc = -(px * vx + py * vy) / sigma;
  return std::asin(cos_inc);
}

}  // namespace oracle
