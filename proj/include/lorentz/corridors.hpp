#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lorentz/dynamics.hpp"
#include "lorentz/vec.hpp"

namespace lorentz {

/// One side of an open corridor: direction xi, the lattice point xi_prime on
/// the opposite wall, and the free width between the disks.
struct CorridorKey {
  IVec2 xi;
  IVec2 xi_prime;
  double width{0.0};
};

struct CorridorSet {
  double sigma{0.0};
  std::vector<CorridorKey> entries;  // two per direction, sorted by (|xi|, xi)

  std::size_t directions() const { return entries.size() / 2; }
};

std::int64_t gcd(std::int64_t a, std::int64_t b);
bool is_primitive(const IVec2 &v);

/// max{0, 1/|xi| - 2 sigma}. Throws NonPrimitive.
double corridor_width(const IVec2 &xi, double sigma);

/// Brute-force width: nearest lattice point off the line R xi on each side,
/// searched within |m| <= bound; the smaller side distance minus 2 sigma.
double width_oracle(const IVec2 &xi, double sigma, std::int64_t bound);

/// Both boundary points of the corridor in direction xi. The first is the
/// smaller of the two Stern-Brocot parents (the last convergent before xi),
/// the second is xi minus the first. For axis directions the second is the
/// mirror image of the first. |det(xi', xi)| = 1 for both.
std::pair<IVec2, IVec2> convergent_pair(const IVec2 &xi);

/// Primitive vectors with |xi| < radius, all eight octants.
std::vector<IVec2> primitive_directions(double radius);

CorridorSet enumerate_corridors(double sigma);

struct SumResult {
  double exact{0.0};
  double asymptotic{0.0};
};

/// Euler phi for 0..n by a linear sieve.
std::vector<std::int64_t> totient_table(std::int64_t n);

/// sum_{n<=N} n^a phi(n) and N^{a+2}/((a+2) zeta(2)). Integer exponents
/// a >= 0 are summed in 128-bit integers. Throws ExponentOutOfRange for a <= -2.
SumResult totient_sum(std::int64_t n, double a);

/// sum over corridor pairs of |xi|^a with its small-sigma behaviour:
/// (2/(a+2)) (2 pi/zeta(2)) (2 sigma)^-(a+2) for a > -2,
/// 2 (2 pi/zeta(2)) log(1/(2 sigma)) for a = -2, and for a < -2 the limit
/// 2 sum_{primitive} |xi|^a = 8 zeta(s) beta(s)/zeta(2s), s = -a/2.
SumResult corridor_sum(double sigma, double a);

/// Sum over corridor pairs of d^2 <t, xi>^2 / |xi|.
double abar(const Vec2 &t, double sigma);

/// (sigma/2) times the quadratic form of abar in the standard basis.
Mat2 abar_matrix(double sigma);

double riemann_zeta(double s);
double dirichlet_beta(double s);

struct Rational {
  std::int64_t num{0};
  std::int64_t den{1};
  friend bool operator==(const Rational &, const Rational &) = default;
};

/// Newman's successor in the Calkin-Wilf sequence: 1/(1 - x + 2 floor(x)).
Rational calkin_wilf(const Rational &x);

/// Lattice form of the same map on xi = (p, q), slope q/p.
IVec2 calkin_wilf_lattice(std::int64_t p, std::int64_t q);

}  // namespace lorentz
