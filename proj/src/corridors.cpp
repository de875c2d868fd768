#include "lorentz/corridors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lorentz/errors.hpp"

namespace lorentz {

namespace {

__extension__ typedef __int128 i128;

constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;

std::string show(const IVec2 &v) {
  return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
}

// Signed permutation taking v into the octant x >= y >= 0.
struct Symmetry {
  bool swap{false};
  std::int64_t sx{1};
  std::int64_t sy{1};

  IVec2 forward(IVec2 v) const {
    v = {sx * v.x, sy * v.y};
    return swap ? IVec2{v.y, v.x} : v;
  }
  IVec2 backward(IVec2 v) const {
    if (swap) v = {v.y, v.x};
    return {sx * v.x, sy * v.y};
  }
};

Symmetry to_first_octant(const IVec2 &v) {
  Symmetry g;
  g.sx = v.x < 0 ? -1 : 1;
  g.sy = v.y < 0 ? -1 : 1;
  g.swap = std::abs(v.y) > std::abs(v.x);
  return g;
}

// x, y with a x + b y = gcd(a, b).
void ext_gcd(std::int64_t a, std::int64_t b, std::int64_t &x, std::int64_t &y) {
  std::int64_t x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    const std::int64_t q = a / b;
    std::tie(a, b) = std::make_pair(b, a - q * b);
    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
    std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
  }
  x = x0;
  y = y0;
}

std::pair<IVec2, IVec2> first_octant_pair(const IVec2 &xi) {
  const std::int64_t p = xi.x;
  const std::int64_t q = xi.y;
  if (q == 0) return {{0, 1}, {0, -1}};
  if (p == q) return {{1, 0}, {0, 1}};
  // p' q - q' p = 1 with 0 < p' < p picks one Stern-Brocot parent.
  std::int64_t x = 0, y = 0;
  ext_gcd(p, q, x, y);
  std::int64_t pp = y % p;
  if (pp < 0) pp += p;
  const std::int64_t qp = (pp * q - 1) / p;
  const IVec2 a{pp, qp};
  const IVec2 b = xi - a;
  return norm2(a) <= norm2(b) ? std::make_pair(a, b) : std::make_pair(b, a);
}

double zeta_tail_free(double s, int n) {
  // Euler-Maclaurin with three correction terms past n.
  double sum = 0.0;
  for (int k = n - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double N = n;
  const double ns = std::pow(N, -s);
  sum += N * ns / (s - 1.0) + 0.5 * ns + s * ns / (12.0 * N) -
         s * (s + 1.0) * (s + 2.0) * ns / (720.0 * N * N * N);
  return sum;
}

std::vector<IVec2> octant_directions(double radius) {
  const double r2 = radius * radius;
  auto inside = [&](const IVec2 &v) { return static_cast<double>(norm2(v)) < r2; };

  // Stern-Brocot descent over slopes in (0, 1); mediants grow in norm, so a
  // subtree is pruned once its root leaves the disk.
  std::vector<IVec2> octant;
  if (inside({1, 0})) octant.push_back({1, 0});
  if (inside({1, 1})) octant.push_back({1, 1});
  std::vector<std::pair<IVec2, IVec2>> stack{{{1, 0}, {1, 1}}};
  while (!stack.empty()) {
    const auto [l, r] = stack.back();
    stack.pop_back();
    const IVec2 m = l + r;
    if (!inside(m)) continue;
    octant.push_back(m);
    stack.push_back({m, r});
    stack.push_back({l, m});
  }
  return octant;
}

// Distinct images of v under the eight lattice symmetries.
std::vector<IVec2> orbit(const IVec2 &v) {
  std::vector<IVec2> images{{v.x, v.y},   {v.y, v.x},   {-v.y, v.x}, {-v.x, v.y},
                            {-v.x, -v.y}, {-v.y, -v.x}, {v.y, -v.x}, {v.x, -v.y}};
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());
  return images;
}

}  // namespace

std::int64_t gcd(std::int64_t a, std::int64_t b) {
  a = std::abs(a);
  b = std::abs(b);
  while (b != 0) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

bool is_primitive(const IVec2 &v) { return gcd(v.x, v.y) == 1; }

double corridor_width(const IVec2 &xi, double sigma) {
  if (!is_primitive(xi)) throw NonPrimitive(show(xi) + " is not primitive");
  return std::max(0.0, 1.0 / norm(xi) - 2.0 * sigma);
}

double width_oracle(const IVec2 &xi, double sigma, std::int64_t bound) {
  const std::int64_t b2 = bound * bound;
  std::int64_t best_pos = std::numeric_limits<std::int64_t>::max();
  std::int64_t best_neg = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t x = -bound; x <= bound; ++x) {
    for (std::int64_t y = -bound; y <= bound; ++y) {
      if (x * x + y * y > b2) continue;
      const std::int64_t c = cross(xi, IVec2{x, y});
      if (c > 0) best_pos = std::min(best_pos, c);
      if (c < 0) best_neg = std::min(best_neg, -c);
    }
  }
  const double len = norm(xi);
  const double side_pos = static_cast<double>(best_pos) / len;
  const double side_neg = static_cast<double>(best_neg) / len;
  return std::max(0.0, std::min(side_pos, side_neg) - 2.0 * sigma);
}

std::pair<IVec2, IVec2> convergent_pair(const IVec2 &xi) {
  if (!is_primitive(xi)) throw NonPrimitive(show(xi) + " is not primitive");
  const Symmetry g = to_first_octant(xi);
  const auto [a, b] = first_octant_pair(g.forward(xi));
  return {g.backward(a), g.backward(b)};
}

std::vector<IVec2> primitive_directions(double radius) {
  std::vector<IVec2> out;
  for (const IVec2 &v : octant_directions(radius)) {
    const auto images = orbit(v);
    out.insert(out.end(), images.begin(), images.end());
  }
  std::sort(out.begin(), out.end(), [](const IVec2 &a, const IVec2 &b) {
    const auto na = norm2(a), nb = norm2(b);
    return na != nb ? na < nb : a < b;
  });
  return out;
}

CorridorSet enumerate_corridors(double sigma) {
  if (!(sigma > 0.0 && sigma < 0.5)) {
    throw InvalidConfig("sigma", "must lie in (0, 1/2)");
  }
  CorridorSet set;
  set.sigma = sigma;
  for (const IVec2 &xi : primitive_directions(1.0 / (2.0 * sigma))) {
    const double w = corridor_width(xi, sigma);
    if (w <= 0.0) continue;
    const auto [a, b] = convergent_pair(xi);
    set.entries.push_back({xi, a, w});
    set.entries.push_back({xi, b, w});
  }
  return set;
}

std::vector<std::int64_t> totient_table(std::int64_t n) {
  std::vector<std::int64_t> phi(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int64_t> primes;
  if (n >= 1) phi[1] = 1;
  for (std::int64_t i = 2; i <= n; ++i) {
    if (phi[i] == 0) {
      phi[i] = i - 1;
      primes.push_back(i);
    }
    for (std::int64_t p : primes) {
      const std::int64_t m = i * p;
      if (m > n) break;
      if (i % p == 0) {
        phi[m] = phi[i] * p;
        break;
      }
      phi[m] = phi[i] * (p - 1);
    }
  }
  return phi;
}

SumResult totient_sum(std::int64_t n, double a) {
  if (!(a > -2.0)) throw ExponentOutOfRange("a = " + std::to_string(a) + " must exceed -2");
  if (n < 1) throw InvalidConfig("N", "must be at least 1");
  const auto phi = totient_table(n);
  SumResult r;
  const bool integral = a >= 0.0 && a == std::floor(a) && a <= 3.0;
  if (integral) {
    const int e = static_cast<int>(a);
    i128 total = 0;
    for (std::int64_t k = 1; k <= n; ++k) {
      i128 term = phi[k];
      for (int i = 0; i < e; ++i) term *= k;
      total += term;
    }
    r.exact = static_cast<double>(total);
  } else {
    double total = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
      total += std::pow(static_cast<double>(k), a) * static_cast<double>(phi[k]);
    }
    r.exact = total;
  }
  r.asymptotic = std::pow(static_cast<double>(n), a + 2.0) / ((a + 2.0) * kZeta2);
  return r;
}

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw ExponentOutOfRange("zeta needs s > 1");
  return zeta_tail_free(s, 64);
}

double dirichlet_beta(double s) {
  if (!(s > 0.0)) throw ExponentOutOfRange("beta needs s > 0");
  // beta(s) = 4^-s (zeta(s, 1/4) - zeta(s, 3/4)), each Hurwitz zeta summed
  // directly to k < K and closed with Euler-Maclaurin.
  auto hurwitz_diff = [s]() {
    const int K = 64;
    double sum = 0.0;
    for (int k = K - 1; k >= 0; --k) {
      sum += std::pow(k + 0.25, -s) - std::pow(k + 0.75, -s);
    }
    // Euler-Maclaurin corrections past K; the integral term is handled
    // separately so that s = 1 needs no special case.
    auto corrections = [s, K](double q) {
      const double x = K + q;
      const double xs = std::pow(x, -s);
      return 0.5 * xs + s * xs / (12.0 * x) - s * (s + 1.0) * (s + 2.0) * xs / (720.0 * x * x * x);
    };
    auto integral = [s, K](double q) {
      const double x = K + q;
      return s == 1.0 ? -std::log(x) : x * std::pow(x, -s) / (s - 1.0);
    };
    return sum + integral(0.25) - integral(0.75) + corrections(0.25) - corrections(0.75);
  };
  return std::pow(4.0, -s) * hurwitz_diff();
}

SumResult corridor_sum(double sigma, double a) {
  const CorridorSet set = enumerate_corridors(sigma);
  std::vector<double> terms;
  terms.reserve(set.entries.size());
  for (const auto &e : set.entries) terms.push_back(std::pow(norm(e.xi), a));
  SumResult r;
  for (double t : terms) r.exact += t;
  const double c = 2.0 * std::numbers::pi / kZeta2;
  if (a > -2.0) {
    r.asymptotic = 2.0 / (a + 2.0) * c * std::pow(2.0 * sigma, -(a + 2.0));
  } else if (a == -2.0) {
    r.asymptotic = 2.0 * c * std::log(1.0 / (2.0 * sigma));
  } else {
    const double s = -a / 2.0;
    r.asymptotic = 8.0 * riemann_zeta(s) * dirichlet_beta(s) / riemann_zeta(2.0 * s);
  }
  return r;
}

namespace {

// Quadratic form of abar. Each orbit contributes its integer moment sums, so
// the xx and yy entries agree bit for bit and xy cancels exactly.
Mat2 abar_form(double sigma) {
  if (!(sigma > 0.0 && sigma < 0.5)) throw InvalidConfig("sigma", "must lie in (0, 1/2)");
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (const IVec2 &v : octant_directions(1.0 / (2.0 * sigma))) {
    const double d = corridor_width(v, sigma);
    if (d <= 0.0) continue;
    std::int64_t sxx = 0, sxy = 0, syy = 0;
    for (const IVec2 &w : orbit(v)) {
      sxx += w.x * w.x;
      sxy += w.x * w.y;
      syy += w.y * w.y;
    }
    // Two corridor pairs per direction.
    const double weight = 2.0 * d * d / norm(v);
    xx += weight * static_cast<double>(sxx);
    xy += weight * static_cast<double>(sxy);
    yy += weight * static_cast<double>(syy);
  }
  return {{{xx, xy}, {xy, yy}}};
}

}  // namespace

Mat2 abar_matrix(double sigma) {
  Mat2 m = abar_form(sigma);
  for (auto &row : m) {
    for (double &x : row) x *= sigma / 2.0;
  }
  return m;
}

double abar(const Vec2 &t, double sigma) {
  if (t.x == 0.0 && t.y == 0.0) return 0.0;
  const Mat2 b = abar_form(sigma);
  return t.x * t.x * b[0][0] + 2.0 * t.x * t.y * b[0][1] + t.y * t.y * b[1][1];
}

Rational calkin_wilf(const Rational &x) {
  if (x.den <= 0 || x.num < 0) throw InvalidConfig("x", "needs a nonnegative rational");
  const std::int64_t k = x.num / x.den;
  // 1 / (1 - x + 2k) = den / (den - num + 2 k den)
  Rational r{x.den, x.den - x.num + 2 * k * x.den};
  const std::int64_t g = gcd(r.num, r.den);
  return {r.num / g, r.den / g};
}

IVec2 calkin_wilf_lattice(std::int64_t p, std::int64_t q) {
  if (p <= 0 || q < 0) throw InvalidConfig("xi", "needs p > 0 and q >= 0");
  return {p - q + 2 * p * (q / p), p};
}

}  // namespace lorentz
