#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lorentz/dynamics.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/rng.hpp"
#include "oracles/geometry.hpp"

using namespace lorentz;

namespace {

constexpr double kPi = std::numbers::pi;

PhasePoint draw(RandomStream &rng) {
  const double theta = 2.0 * kPi * rng.uniform();
  const double phi = std::asin(2.0 * rng.uniform() - 1.0);
  return {theta, phi, {0, 0}};
}

}  // namespace

TEST_CASE("table parameters") {
  const TableParams t(0.1);
  CHECK(t.tau_min() == doctest::Approx(0.8));
  CHECK(t.curvature() == doctest::Approx(10.0));
  CHECK_THROWS_AS(TableParams(0.6), InvalidConfig);
  CHECK_THROWS_AS(TableParams(0.5), InvalidConfig);
  CHECK_THROWS_AS(TableParams(0.0), InvalidConfig);
}

TEST_CASE("to_cartesian") {
  SUBCASE("head-on at the top of the disk") {
    const Pose p = to_cartesian({0.0, 0.0, {0, 0}}, TableParams(0.1));
    CHECK(p.point.x == doctest::Approx(0.0));
    CHECK(p.point.y == doctest::Approx(0.1));
    CHECK(p.direction.x == doctest::Approx(0.0));
    CHECK(p.direction.y == doctest::Approx(1.0));
  }
  SUBCASE("tangent launch points along increasing theta") {
    const Pose p = to_cartesian({kPi / 2, kPi / 2, {0, 0}}, TableParams(0.1));
    CHECK(p.point.x == doctest::Approx(0.1));
    CHECK(p.point.y == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.direction.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.direction.y == doctest::Approx(-1.0));
  }
  SUBCASE("rotation-matrix oracle") {
    const Pose p = to_cartesian({kPi / 4, kPi / 6, {2, 3}}, TableParams(0.2));
    const auto o = oracle::cartesian(std::numbers::pi_v<long double> / 4,
                                     std::numbers::pi_v<long double> / 6, 2, 3, 0.2L);
    CHECK(std::abs(p.point.x - static_cast<double>(o.px)) < 1e-15);
    CHECK(std::abs(p.point.y - static_cast<double>(o.py)) < 1e-15);
    CHECK(std::abs(p.direction.x - static_cast<double>(o.dx)) < 1e-15);
    CHECK(std::abs(p.direction.y - static_cast<double>(o.dy)) < 1e-15);
    CHECK(std::abs(norm(p.direction) - 1.0) < 1e-14);
  }
}

TEST_CASE("next_collision fixed shots") {
  const TableParams table(0.1);
  SUBCASE("vertical shot") {
    const HitRecord h = next_collision({0.0, 0.0, {0, 0}}, table);
    CHECK(h.cell == IVec2{0, 1});
    CHECK(h.tau == doctest::Approx(0.8));
    CHECK(h.point.y == doctest::Approx(0.9));
  }
  SUBCASE("diagonal shot from the right pole") {
    // Start (0.1, 0) heading (1, 1)/sqrt 2; in this chart that is phi = -pi/4.
    const CartesianState s{{0, 0}, {1.0, 0.0}, normalized({1.0, 1.0})};
    const PhasePoint p = to_phase(s);
    CHECK(p.theta == doctest::Approx(kPi / 2));
    CHECK(p.phi == doctest::Approx(-kPi / 4));
    const HitRecord h = next_collision(p, table);
    const auto o = oracle::brute_force_hit(0.1L, 0.0L, std::sqrt(0.5L), std::sqrt(0.5L), 0.1L, 50);
    REQUIRE(o.has_value());
    CHECK(o->cell == IVec2{1, 1});
    CHECK(h.cell == IVec2{1, 1});
    CHECK(std::abs(h.tau - static_cast<double>(o->t)) < 1e-12);
  }
  SUBCASE("shallow launches into the horizontal corridor") {
    for (double alpha : {0.05, 0.01, 0.003}) {
      // From the top of disk 0 heading right at angle alpha above horizontal.
      const PhasePoint p{0.0, kPi / 2 - alpha, {0, 0}};
      const HitRecord h = next_collision(p, table);
      const Pose pose = to_cartesian(p, table);
      const auto o = oracle::brute_force_hit(pose.point.x, pose.point.y, pose.direction.x,
                                             pose.direction.y, 0.1L,
                                             static_cast<std::int64_t>(2.0 / alpha));
      REQUIRE(o.has_value());
      CHECK(h.cell == o->cell);
      CHECK(h.cell.y == 1);
      // The ray climbs 1 - 2 sigma before meeting the next row.
      const double n_est = 0.8 / std::tan(alpha);
      CHECK(std::abs(static_cast<double>(h.cell.x) - n_est) < 2.0);
    }
  }
}

TEST_CASE("next_collision agrees with a brute-force disk scan") {
  for (double sigma : {0.05, 0.1, 0.2, 0.4}) {
    const TableParams table(sigma);
    RandomStream rng(7, StreamTag::Test, static_cast<std::uint64_t>(sigma * 1000));
    int long_flights = 0;
    for (int i = 0; i < 2000; ++i) {
      const PhasePoint p = draw(rng);
      const HitRecord h = next_collision(p, table);
      if (h.tau > 60.0) {
        ++long_flights;
        continue;
      }
      const Pose pose = to_cartesian(p, table);
      const auto o = oracle::brute_force_hit(pose.point.x, pose.point.y, pose.direction.x,
                                             pose.direction.y, sigma, 64);
      REQUIRE(o.has_value());
      CHECK(h.cell == o->cell);
      CHECK(std::abs(h.tau - static_cast<double>(o->t)) < 1e-10);
    }
    CHECK(long_flights < 100);
  }
}

TEST_CASE("billiard_map") {
  const TableParams table(0.1);
  SUBCASE("head-on reflection") {
    const FlightResult r = billiard_map({0.0, 0.0, {0, 0}}, table);
    CHECK(r.next.cell == IVec2{0, 1});
    CHECK(r.next.theta == doctest::Approx(kPi));
    CHECK(r.next.phi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.kappa == IVec2{0, 1});
    CHECK(r.tau == doctest::Approx(0.8));
  }
  SUBCASE("grazing launches are refused") {
    CHECK_THROWS_AS(billiard_map({0.0, kPi / 2, {0, 0}}, table), GrazingLaunch);
    CHECK_THROWS_AS(billiard_map({1.0, -kPi / 2, {0, 0}}, table), GrazingLaunch);
    CHECK_THROWS_AS(next_collision({1.0, kPi / 2 - 1e-13, {0, 0}}, table), GrazingLaunch);
  }
  SUBCASE("flight cap") {
    const TableParams capped(0.1, 5.0);
    CHECK_THROWS_AS(billiard_map({0.0, kPi / 2 - 1e-3, {0, 0}}, capped), FlightCapExceeded);
  }
}

TEST_CASE("flight invariants and time reversal on random samples") {
  for (double sigma : {0.05, 0.1, 0.2, 0.4}) {
    const TableParams table(sigma);
    RandomStream rng(11, StreamTag::Test, static_cast<std::uint64_t>(sigma * 1000));
    double worst_q = 0.0, worst_rev = 0.0, worst_dir = 0.0;
    bool floor_ok = true, proximity_ok = true, kappa_sum_zero = true;
    for (int i = 0; i < 100000; ++i) {
      const PhasePoint p = draw(rng);
      const FlightResult r = billiard_map(p, table);
      floor_ok = floor_ok && r.tau >= table.tau_min() - 1e-12;
      const Vec2 off = r.q - to_real(r.kappa);
      proximity_ok = proximity_ok && norm(off) <= 1.0;
      const Pose pose = to_cartesian(p, table);
      worst_q = std::max(worst_q, norm(r.q - r.tau * pose.direction));
      worst_dir = std::max(worst_dir, std::abs(norm(to_cartesian(r.next, table).direction) - 1.0));

      const FlightResult back = billiard_map(reverse(r.next), table);
      kappa_sum_zero = kappa_sum_zero && (r.kappa + back.kappa == IVec2{0, 0});
      const PhasePoint home = reverse(back.next);
      worst_rev = std::max({worst_rev, std::abs(wrap_difference(home.theta - p.theta)),
                            std::abs(home.phi - p.phi)});
      CHECK(home.cell == p.cell);
    }
    CHECK(floor_ok);
    CHECK(proximity_ok);
    CHECK(kappa_sum_zero);
    CHECK(worst_q < 1e-9);
    CHECK(worst_rev < 1e-8);
    CHECK(worst_dir < 1e-14);
  }
}

TEST_CASE("reverse is an involution") {
  const PhasePoint p{1.3, 0.4, {5, -2}};
  const PhasePoint q = reverse(reverse(p));
  CHECK(q.theta == p.theta);
  CHECK(q.phi == p.phi);
  CHECK(q.cell == p.cell);
  const PhasePoint z = reverse({2.0, 0.0, {1, 1}});
  CHECK(z.phi == 0.0);
}

TEST_CASE("Cartesian stepping matches the angle chart") {
  const TableParams table(0.15);
  RandomStream rng(3, StreamTag::Test, 0);
  for (int i = 0; i < 2000; ++i) {
    const PhasePoint p = draw(rng);
    CartesianState s = to_state(p);
    const FlightResult one = billiard_map(p, table);
    const Step first = advance(s, table);
    CHECK(first.kappa == one.kappa);
    CHECK(first.tau == one.tau);
    const PhasePoint b1 = to_phase(s);
    CHECK(std::abs(wrap_difference(one.next.theta - b1.theta)) < 1e-12);
    CHECK(std::abs(one.next.phi - b1.phi) < 1e-12);

    // Rounding differs between the two paths and is amplified by the
    // hyperbolicity, so longer runs are compared loosely.
    PhasePoint a = one.next;
    IVec2 total = one.kappa;
    IVec2 fast = first.kappa;
    for (int k = 0; k < 4; ++k) {
      const FlightResult r = billiard_map(a, table);
      a = r.next;
      total += r.kappa;
      fast += advance(s, table).kappa;
    }
    const PhasePoint b = to_phase(s);
    CHECK(fast == total);
    CHECK(std::abs(wrap_difference(a.theta - b.theta)) < 1e-6);
    CHECK(std::abs(a.phi - b.phi) < 1e-6);
  }
}

TEST_CASE("derivative: unstable cone, p-norm and Euclidean expansion") {
  for (double sigma : {0.1, 0.25}) {
    const TableParams table(sigma);
    RandomStream rng(5, StreamTag::Test, static_cast<std::uint64_t>(sigma * 100));
    const double top = 1.0 + sigma / table.tau_min();
    const double p_floor = 1.0 + 2.0 * table.tau_min() / sigma;
    int done = 0, straddles = 0, cone_fail = 0, pnorm_fail = 0, eucl_fail = 0;
    while (done < 10000) {
      const PhasePoint p = draw(rng);
      if (std::abs(p.phi) > 1.5) continue;
      Mat2 m;
      try {
        m = tangent_jacobian(p, table, 1e-7);
      } catch (const SingularityStraddle &) {
        ++straddles;
        continue;
      }
      const FlightResult r = billiard_map(p, table);
      if (std::abs(r.next.phi) > 1.5) continue;
      ++done;
      const double s0 = 1.0 + (top - 1.0) * rng.uniform();
      const TangentVector v{1.0, s0};
      REQUIRE(in_unstable_cone(v, table));
      const TangentVector w = push_forward(m, v);
      if (!in_unstable_cone(w, table)) ++cone_fail;
      if (p_norm(w, r.next.phi) / p_norm(v, p.phi) < p_floor) ++pnorm_fail;
      const double ratio = euclidean_norm(w, table) / euclidean_norm(v, table);
      const double predicted =
          expansion_factor(p.phi, r.next.phi, r.tau, s0, w.dphi / w.dtheta, table);
      if (std::abs(ratio / predicted - 1.0) > 0.01) ++eucl_fail;
    }
    CHECK(cone_fail == 0);
    CHECK(pnorm_fail == 0);
    CHECK(eucl_fail == 0);
    CHECK(straddles < 100);
  }
  CHECK_THROWS_AS(tangent_jacobian({0.0, 0.0, {0, 0}}, TableParams(0.1), 0.0), InvalidConfig);
}

TEST_CASE("tangent_jacobian refuses to straddle a singularity") {
  // A step of 0.2 rad moves most launches onto a different scatterer.
  const TableParams table(0.1);
  RandomStream rng(9, StreamTag::Test, 0);
  int straddles = 0;
  for (int i = 0; i < 100; ++i) {
    PhasePoint p = draw(rng);
    if (std::abs(p.phi) > 1.2) continue;
    try {
      tangent_jacobian(p, table, 0.2);
    } catch (const SingularityStraddle &) {
      ++straddles;
    }
  }
  CHECK(straddles > 50);
}
