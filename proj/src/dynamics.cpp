#include "lorentz/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lorentz/errors.hpp"

namespace lorentz {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGrazing = 1e-12;

struct Cast {
  IVec2 offset;  // hit cell minus start cell
  double t{0.0};
};

// Amanatides-Woo walk over unit squares centred on lattice points. A disk of
// radius < 1/2 sits inside its own square, so the first disk hit in visiting
// order is the first hit along the ray and one test per square suffices.
// `p` is the start point relative to the start cell centre.
Cast cast_ray(const Vec2 &p, const Vec2 &v, const TableParams &table) {
  const double sigma = table.sigma();
  const double r_hit = sigma - kGrazing;
  const double sigma2 = sigma * sigma;
  const double inf = std::numeric_limits<double>::infinity();

  const std::int64_t step_x = v.x > 0 ? 1 : -1;
  const std::int64_t step_y = v.y > 0 ? 1 : -1;
  double t_max_x = v.x != 0.0 ? (0.5 * static_cast<double>(step_x) - p.x) / v.x : inf;
  double t_max_y = v.y != 0.0 ? (0.5 * static_cast<double>(step_y) - p.y) / v.y : inf;
  const double t_delta_x = v.x != 0.0 ? 1.0 / std::abs(v.x) : inf;
  const double t_delta_y = v.y != 0.0 ? 1.0 / std::abs(v.y) : inf;

  std::int64_t ix = 0;
  std::int64_t iy = 0;
  const double cap = table.flight_cap();
  for (;;) {
    double t_enter;
    if (t_max_x < t_max_y) {
      t_enter = t_max_x;
      ix += step_x;
      t_max_x += t_delta_x;
    } else {
      t_enter = t_max_y;
      iy += step_y;
      t_max_y += t_delta_y;
    }
    if (t_enter > cap) {
      throw FlightCapExceeded("no collision within " + std::to_string(cap) + " lattice units");
    }
    const double wx = static_cast<double>(ix) - p.x;
    const double wy = static_cast<double>(iy) - p.y;
    const double b = v.x * wx + v.y * wy;
    if (b <= 0.0) continue;
    const double perp = std::abs(v.x * wy - v.y * wx);
    if (perp >= r_hit) continue;
    const double disc = sigma2 - perp * perp;
    const double c = wx * wx + wy * wy - sigma2;
    return {{ix, iy}, c / (b + std::sqrt(disc))};
  }
}

void check_launch(double phi) {
  if (!(std::abs(phi) <= std::numbers::pi / 2 - kGrazing)) {
    throw GrazingLaunch("phi = " + std::to_string(phi) + " is tangential");
  }
}

Vec2 reflect(const Vec2 &v, const Vec2 &n) { return v - 2.0 * dot(v, n) * n; }

}  // namespace

TableParams::TableParams(double sigma, double flight_cap) : sigma_(sigma), flight_cap_(flight_cap) {
  if (!(sigma > 0.0 && sigma < 0.5)) {
    throw InvalidConfig("sigma", "must lie in (0, 1/2), got " + std::to_string(sigma));
  }
  if (!(flight_cap > 1.0)) {
    throw InvalidConfig("flight_cap", "must exceed 1");
  }
}

double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double wrap_difference(double a) {
  double r = wrap_angle(a + std::numbers::pi) - std::numbers::pi;
  return r;
}

Pose to_cartesian(const PhasePoint &p, const TableParams &table) {
  const double st = std::sin(p.theta);
  const double ct = std::cos(p.theta);
  const Vec2 n{st, ct};
  const Vec2 t{ct, -st};
  const Vec2 point = to_real(p.cell) + table.sigma() * n;
  return {point, std::cos(p.phi) * n + std::sin(p.phi) * t};
}

CartesianState to_state(const PhasePoint &p) {
  const double st = std::sin(p.theta);
  const double ct = std::cos(p.theta);
  const Vec2 n{st, ct};
  const Vec2 t{ct, -st};
  return {p.cell, n, std::cos(p.phi) * n + std::sin(p.phi) * t};
}

PhasePoint to_phase(const CartesianState &s) {
  const Vec2 t{s.normal.y, -s.normal.x};
  return {wrap_angle(std::atan2(s.normal.x, s.normal.y)),
          std::atan2(dot(s.velocity, t), dot(s.velocity, s.normal)), s.cell};
}

HitRecord next_collision(const PhasePoint &p, const TableParams &table) {
  check_launch(p.phi);
  const CartesianState s = to_state(p);
  const Cast hit = cast_ray(table.sigma() * s.normal, s.velocity, table);
  const IVec2 cell = p.cell + hit.offset;
  const Vec2 local = table.sigma() * s.normal + hit.t * s.velocity - to_real(hit.offset);
  return {cell, to_real(cell) + local, s.velocity, hit.t};
}

Step advance(CartesianState &s, const TableParams &table) {
  const double sigma = table.sigma();
  const Vec2 p = sigma * s.normal;
  const Cast hit = cast_ray(p, s.velocity, table);
  const Vec2 local = p + hit.t * s.velocity - to_real(hit.offset);
  const Vec2 n1 = normalized(local);
  s.cell += hit.offset;
  s.normal = n1;
  s.velocity = normalized(reflect(s.velocity, n1));
  return {hit.offset, hit.t};
}

FlightResult billiard_map(const PhasePoint &p, const TableParams &table) {
  check_launch(p.phi);
  CartesianState s = to_state(p);
  const Vec2 n0 = s.normal;
  const Step step = advance(s, table);
  const Vec2 q = to_real(step.kappa) + table.sigma() * (s.normal - n0);
  return {to_phase(s), step.kappa, step.tau, q};
}

PhasePoint reverse(const PhasePoint &p) { return {p.theta, -p.phi, p.cell}; }

Mat2 tangent_jacobian(const PhasePoint &p, const TableParams &table, double h) {
  if (!(h > 0.0)) throw InvalidConfig("h", "finite-difference step must be positive");
  const FlightResult base = billiard_map(p, table);
  auto eval = [&](double dtheta, double dphi) {
    const PhasePoint q{wrap_angle(p.theta + dtheta), p.phi + dphi, p.cell};
    const FlightResult r = billiard_map(q, table);
    if (r.kappa != base.kappa) {
      throw SingularityStraddle("perturbation of size " + std::to_string(h) +
                                " crosses a singularity line");
    }
    return r.next;
  };
  const PhasePoint tp = eval(h, 0.0);
  const PhasePoint tm = eval(-h, 0.0);
  const PhasePoint pp = eval(0.0, h);
  const PhasePoint pm = eval(0.0, -h);
  const double inv = 1.0 / (2.0 * h);
  Mat2 m{};
  m[0][0] = wrap_difference(tp.theta - tm.theta) * inv;
  m[1][0] = (tp.phi - tm.phi) * inv;
  m[0][1] = wrap_difference(pp.theta - pm.theta) * inv;
  m[1][1] = (pp.phi - pm.phi) * inv;
  return m;
}

TangentVector push_forward(const Mat2 &m, const TangentVector &v) {
  return {m[0][0] * v.dtheta + m[0][1] * v.dphi, m[1][0] * v.dtheta + m[1][1] * v.dphi};
}

bool in_unstable_cone(const TangentVector &v, const TableParams &table) {
  if (v.dtheta == 0.0) return false;
  const double slope = v.dphi / v.dtheta;
  return slope >= 1.0 && slope <= 1.0 + table.sigma() / table.tau_min();
}

double p_norm(const TangentVector &v, double phi) { return std::cos(phi) * std::abs(v.dtheta); }

double euclidean_norm(const TangentVector &v, const TableParams &table) {
  return std::hypot(table.sigma() * v.dtheta, v.dphi);
}

double expansion_factor(double phi, double phi1, double tau, double s0, double s1,
                        const TableParams &table) {
  const double sigma = table.sigma();
  const double metric = std::sqrt((sigma * sigma + s1 * s1) / (sigma * sigma + s0 * s0));
  return metric * tau / (sigma * std::cos(phi1)) * (1.0 + s0 + sigma * std::cos(phi) / tau);
}

}  // namespace lorentz
