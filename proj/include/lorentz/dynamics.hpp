#pragma once

#include <array>

#include "lorentz/vec.hpp"

namespace lorentz {

/// Scatterer geometry: disks of radius sigma centered on Z^2.
class TableParams {
 public:
  static constexpr double kDefaultFlightCap = 1e6;

  explicit TableParams(double sigma, double flight_cap = kDefaultFlightCap);

  double sigma() const { return sigma_; }
  /// Shortest possible free flight, 1 - 2 sigma.
  double tau_min() const { return 1.0 - 2.0 * sigma_; }
  double curvature() const { return 1.0 / sigma_; }
  double flight_cap() const { return flight_cap_; }

 private:
  double sigma_;
  double flight_cap_;
};

/// Collision-space point. theta runs clockwise from the top of the disk;
/// phi is the outgoing angle to the outward normal, positive towards
/// increasing theta.
struct PhasePoint {
  double theta{0.0};
  double phi{0.0};
  IVec2 cell{};
};

struct Pose {
  Vec2 point;
  Vec2 direction;
};

/// Pre-collision record of the next impact.
struct HitRecord {
  IVec2 cell;
  Vec2 point;
  Vec2 direction;
  double tau{0.0};
};

struct FlightResult {
  PhasePoint next;
  IVec2 kappa;
  double tau{0.0};
  Vec2 q;
};

struct TangentVector {
  double dtheta{0.0};
  double dphi{0.0};
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Wraps an angle into [0, 2 pi).
double wrap_angle(double a);
/// Wraps an angle difference into [-pi, pi).
double wrap_difference(double a);

Pose to_cartesian(const PhasePoint &p, const TableParams &table);
HitRecord next_collision(const PhasePoint &p, const TableParams &table);
FlightResult billiard_map(const PhasePoint &p, const TableParams &table);
PhasePoint reverse(const PhasePoint &p);

/// Trajectory state kept in Cartesian form between collisions. The position
/// is cell + sigma * normal, so the hot loop never evaluates trig functions.
struct CartesianState {
  IVec2 cell;
  Vec2 normal;
  Vec2 velocity;
};

struct Step {
  IVec2 kappa;
  double tau{0.0};
};

CartesianState to_state(const PhasePoint &p);
PhasePoint to_phase(const CartesianState &s);

/// One collision of the billiard map on a Cartesian state, in place.
Step advance(CartesianState &s, const TableParams &table);

/// Central finite-difference Jacobian of (theta, phi) -> (theta1, phi1).
/// Throws SingularityStraddle when the five evaluations disagree on kappa.
Mat2 tangent_jacobian(const PhasePoint &p, const TableParams &table, double h);

TangentVector push_forward(const Mat2 &m, const TangentVector &v);

/// Unstable cone, with theta in radians: 1 <= dphi/dtheta <= 1 + sigma/tau_min.
bool in_unstable_cone(const TangentVector &v, const TableParams &table);

/// cos(phi) |dtheta|, the p-metric up to the constant factor sigma.
double p_norm(const TangentVector &v, double phi);

/// sqrt(sigma^2 dtheta^2 + dphi^2), arc length against angle.
double euclidean_norm(const TangentVector &v, const TableParams &table);

/// Closed-form Euclidean expansion of an unstable vector with slope s0 at a
/// point with outgoing angle phi, mapped over a flight tau onto a point with
/// angle phi1 and image slope s1.
double expansion_factor(double phi, double phi1, double tau, double s0, double s1,
                        const TableParams &table);

}  // namespace lorentz
