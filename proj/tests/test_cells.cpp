#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "lorentz/cells.hpp"
#include "lorentz/dynamics.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/sampling.hpp"
#include "oracles/cells.hpp"

using namespace lorentz;

namespace {

constexpr double kPi = std::numbers::pi;

double joint_se(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

TEST_CASE("leading cell measure") {
  const CellId c10 = make_cell({1, 0}, 10, 0.1);
  CHECK(c10.kappa() == IVec2{10, 1});
  const auto m10 = cell_measure_leading(c10, 0.1);
  CHECK(m10.value == doctest::Approx(5.0930e-4).epsilon(1e-4));
  CHECK(m10.regime == CellRegime::Near);

  const auto m1 = cell_measure_leading(make_cell({1, 0}, 1, 0.1), 0.1);
  CHECK(m1.value == doctest::Approx(3.1831e-2).epsilon(1e-4));
  CHECK(m1.regime == CellRegime::Far);

  SUBCASE("branches agree at the regime boundary") {
    // 2 sigma = d/N at sigma = 0.1, N = 4.
    const double d = 0.8, sigma = 0.1;
    const double near = 4 * sigma * sigma / (4 * kPi * 4 * sigma);
    const double far = d * d / 16 / (4 * kPi * 4 * sigma);
    CHECK(near == doctest::Approx(far).epsilon(1e-14));
    CHECK(cell_measure_leading(make_cell({1, 0}, 4, 0.1), 0.1).value ==
          doctest::Approx(near).epsilon(1e-14));
  }

  SUBCASE("d/N < 2 sigma branch scales as N^-3") {
    for (std::int64_t N : {8, 20, 100, 1000}) {
      const double a = cell_measure_leading(make_cell({2, 1}, N, 0.05), 0.05).value;
      const double b = cell_measure_leading(make_cell({2, 1}, 2 * N, 0.05), 0.05).value;
      CHECK(a / b == doctest::Approx(8.0).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(cell_measure_leading(make_cell({3, 2}, 5, 0.2), 0.2), ClosedCorridor);
  CHECK_THROWS_AS(make_cell({1, 0}, 0, 0.1), InvalidConfig);
}

TEST_CASE("one-step displacement distribution") {
  const double sigma = 0.1;
  const TableParams table(sigma);
  RandomStream rng(11, StreamTag::Test, 0);
  const std::uint64_t n = 2'000'000;
  std::map<IVec2, std::uint64_t> hist;
  double sx = 0, sy = 0, sxx = 0, syy = 0, tau = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    CartesianState s = to_state(sample_mu(rng));
    const Step st = advance(s, table);
    ++hist[st.kappa];
    sx += st.kappa.x;
    sy += st.kappa.y;
    sxx += double(st.kappa.x) * st.kappa.x;
    syy += double(st.kappa.y) * st.kappa.y;
    tau += st.tau;
  }
  const double nn = static_cast<double>(n);

  SUBCASE("lattice symmetry of the unit cells") {
    const auto a = stats::proportion(hist[{0, 1}], n);
    const auto b = stats::proportion(hist[{1, 0}], n);
    const auto c = stats::proportion(hist[{-1, 0}], n);
    CHECK(std::abs(a.mean - b.mean) < 3 * joint_se(a.se, b.se));
    CHECK(std::abs(b.mean - c.mean) < 3 * joint_se(b.se, c.se));
  }

  SUBCASE("total probability") {
    const double K = 20;
    std::uint64_t inside = 0;
    for (const auto &[k, count] : hist) inside += norm(k) <= K ? count : 0;
    RandomStream tail_rng(12, StreamTag::Test, 0);
    const auto tail = tail_prob(K, sigma, n, tail_rng);
    const auto in = stats::proportion(inside, n);
    CHECK(std::abs(in.mean + tail.estimate() - 1.0) < 3 * joint_se(in.se, tail.se()));
  }

  SUBCASE("displacement has mean zero") {
    const double se_x = std::sqrt((sxx / nn - (sx / nn) * (sx / nn)) / nn);
    const double se_y = std::sqrt((syy / nn - (sy / nn) * (sy / nn)) / nn);
    CHECK(std::abs(sx / nn) < 3 * se_x);
    CHECK(std::abs(sy / nn) < 3 * se_y);
  }

  SUBCASE("mean free flight matches pi |Q| / |boundary|") {
    const double expected = (1.0 - kPi * sigma * sigma) / (2.0 * sigma);
    CHECK(tau / nn == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("cell measure estimators") {
  const double sigma = 0.1;
  const CellId cell = make_cell({1, 0}, 10, sigma);
  RandomStream r1(21, StreamTag::Test, 0), r2(22, StreamTag::Test, 0);
  const auto mc = cell_measure_mc(cell, sigma, 4'000'000, r1);
  const auto st = cell_measure_stratified(cell, sigma, 400'000, r2);
  CHECK(mc.trials == 4'000'000);
  CHECK(std::abs(mc.estimate() - st.estimate()) < 3 * joint_se(mc.se(), st.se()));

  const double exact = oracle::long_cell_measure(0.8, 1.0, 10, sigma);
  CHECK(st.estimate() == doctest::Approx(exact).epsilon(0.03));

  SUBCASE("cell at N = 100") {
    RandomStream r3(23, StreamTag::Test, 0);
    const CellId c100 = make_cell({1, 0}, 100, sigma);
    const auto s100 = cell_measure_stratified(c100, sigma, 2'000'000, r3);
    const double lead = cell_measure_leading(c100, sigma).value;
    CHECK(s100.estimate() == doctest::Approx(oracle::long_cell_measure(0.8, 1.0, 100, sigma))
                                 .epsilon(0.03));
    CHECK(std::abs(s100.estimate() / lead - 1.0) < 0.10);
  }

  SUBCASE("merging stratified blocks") {
    RandomStream a(24, StreamTag::Test, 0), b(24, StreamTag::Test, 1);
    auto x = cell_measure_stratified(cell, sigma, 1000, a);
    const auto y = cell_measure_stratified(cell, sigma, 3000, b);
    const double total = x.weights.sum + y.weights.sum;
    merge_into(x, y);
    CHECK(x.weights.n == 4000);
    CHECK(x.weights.sum == total);
  }
}

TEST_CASE("singularity angles") {
  const IVec2 xi{1, 0};
  const double sigma = 0.1;

  SUBCASE("closed forms agree with bisected tangents") {
    for (std::int64_t M : {5, 10, 100, 1000, 10000}) {
      const auto a = singularity_angles(xi, M, sigma);
      const long double L0 = M - 0.0L, L1 = M - 1.0L;
      const long double beta = oracle::cross_tangent_angle(L0, 1.0L, sigma);
      const long double alpha = oracle::cross_tangent_angle(L1, 1.0L, sigma);
      const long double graze = oracle::entry_grazing_angle(
          alpha, -1.0L + sigma * std::sin(alpha), sigma * std::cos(alpha), sigma);
      CHECK(a.theta_gap == doctest::Approx(static_cast<double>(beta)).epsilon(1e-9));
      CHECK(a.phi_gap == doctest::Approx(static_cast<double>(graze)).epsilon(1e-7));
      CHECK(kPi / 2 - std::abs(a.phi_prime_kappa) == doctest::Approx(a.phi_gap).epsilon(1e-7));
      CHECK(a.phi_gap > 0);
    }
  }

  SUBCASE("theta gap at M = 100") {
    const auto a = singularity_angles(xi, 100, sigma);
    CHECK(a.theta_gap_predicted == doctest::Approx(8e-3).epsilon(1e-12));
    CHECK(std::abs(a.theta_gap / a.theta_gap_predicted - 1) < 1e-4);
    CHECK(a.phi_gap_predicted == doctest::Approx(0.4).epsilon(1e-12));
  }

  SUBCASE("the tangency point of O_-xi is the top of O_0") {
    CHECK(singularity_angles(xi, 50, sigma).theta_minus_xi == doctest::Approx(0.0));
  }

  SUBCASE("doubling M halves the theta gap") {
    for (std::int64_t M : {100, 400, 3000}) {
      const double r = singularity_angles(xi, 2 * M, sigma).theta_gap /
                       singularity_angles(xi, M, sigma).theta_gap;
      CHECK(r >= 0.49);
      CHECK(r <= 0.51);
    }
  }

  SUBCASE("relative residual times M stays bounded") {
    double lo = 1e300, hi = 0;
    for (std::int64_t M : {100, 1000, 10000}) {
      const auto a = singularity_angles(xi, M, sigma);
      const double r = std::abs(a.phi_gap / a.phi_gap_predicted - 1) * M;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      CHECK(r <= 5.0);
    }
    CHECK(hi / lo < 1.5);
  }

  CHECK_THROWS_AS(singularity_angles(xi, 1, sigma), InvalidConfig);
  CHECK_THROWS_AS(singularity_angles(xi, 2, sigma), NoTangentIntersection);
  CHECK_THROWS_AS(singularity_angles({1, 1}, 10, 0.4), ClosedCorridor);
}

TEST_CASE("corridor chart") {
  const IVec2 xi{1, 0};
  const double sigma = 0.1;

  SUBCASE("chart coordinates round-trip") {
    RandomStream rng(31, StreamTag::Test, 0);
    for (int i = 0; i < 1000; ++i) {
      const PhasePoint p = sample_mu(rng);
      const auto [th, ph] = chart_from_phase(p, {2, 1});
      const PhasePoint q = chart_to_phase(th, ph, {2, 1}, sigma);
      CHECK(std::abs(wrap_difference(q.theta - p.theta)) < 1e-12);
      CHECK(std::abs(q.phi - p.phi) < 1e-12);
    }
  }

  SUBCASE("volume identity on random chart points") {
    RandomStream rng(32, StreamTag::Test, 0);
    int used = 0;
    double sum_h = 0, sum_half = 0;
    while (used < 200) {
      const auto [th, ph] = chart_from_phase(sample_mu(rng), xi);
      try {
        const auto v = volume_form_check(th, ph, xi, sigma, 1e-6);
        const auto w = volume_form_check(th, ph, xi, sigma, 5e-7);
        CHECK(std::abs(v.angle_identity) < 1e-15);
        CHECK(v.discrepancy < 1e-4);
        sum_h += v.discrepancy;
        sum_half += w.discrepancy;
        ++used;
      } catch (const ChartViolation &) {
      }
    }
    const double ratio = sum_h / sum_half;
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }

  SUBCASE("points off the chart are refused") {
    // Heads straight back down into the corridor wall side.
    CHECK_THROWS_AS(volume_form_check(0.0, 0.0, xi, sigma, 1e-6), ChartViolation);
    // Heads towards -xi.
    CHECK_THROWS_AS(volume_form_check(0.0, -1.5, xi, sigma, 1e-6), ChartViolation);
  }

  CHECK_THROWS_AS(volume_form_check(0.1, 1.3, xi, sigma, 0.0), InvalidConfig);
  CHECK_THROWS_AS(volume_form_check(0.1, 1.3, xi, sigma, -1e-6), InvalidConfig);
}

TEST_CASE("L^p norm of the displacement") {
  SUBCASE("sigma ||kappa||_1 is roughly constant") {
    double lo = 1e300, hi = 0;
    for (double sigma : {0.2, 0.1, 0.05}) {
      RandomStream rng(41, StreamTag::Test, static_cast<std::uint64_t>(sigma * 100));
      const auto e = kappa_lp_norm_mc(1.0, sigma, 400'000, rng);
      lo = std::min(lo, e.fitted_constant);
      hi = std::max(hi, e.fitted_constant);
    }
    CHECK(hi / lo <= 1.5);
  }

  SUBCASE("p = 1.5 is stable under doubling") {
    RandomStream a(42, StreamTag::Test, 0), b(42, StreamTag::Test, 1);
    const auto x = kappa_lp_norm_mc(1.5, 0.1, 500'000, a);
    const auto y = kappa_lp_norm_mc(1.5, 0.1, 1'000'000, b);
    CHECK(std::isfinite(x.estimate));
    CHECK(std::abs(x.estimate - y.estimate) < 3 * joint_se(x.se, y.se));
  }

  SUBCASE("|kappa| >= 1 pointwise") {
    RandomStream rng(43, StreamTag::Test, 0);
    const auto values = kappa_power_samples(1.0, 0.4, 100'000, rng);
    CHECK(*std::min_element(values.begin(), values.end()) >= 1.0);
    CHECK(lp_norm_from_samples(1.0, 0.4, values, rng).estimate >= 1.0);
  }

  RandomStream rng(44, StreamTag::Test, 0);
  CHECK_THROWS_AS(kappa_lp_norm_mc(2.0, 0.1, 10, rng), ExponentOutOfRange);
  CHECK_THROWS_AS(kappa_lp_norm_mc(0.5, 0.1, 10, rng), ExponentOutOfRange);
  CHECK_THROWS_AS(lp_norm_from_samples(1.0, 0.1, {}, rng), EmptyData);
}

TEST_CASE("tail of |kappa|") {
  SUBCASE("monotone in H") {
    RandomStream rng(51, StreamTag::Test, 0);
    const std::vector<double> H{4, 8, 16, 32, 64};
    const auto t = tail_counts(H, 0.1, 1'000'000, rng);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i].hits < t[i - 1].hits);
  }

  SUBCASE("axis corridors only at sigma = 0.4") {
    const double sigma = 0.4, d = 0.2;
    RandomStream rng(52, StreamTag::Test, 0);
    const auto t = tail_prob(10, sigma, 10'000'000, rng);
    // |xi' + N xi| > 10 needs N >= 10; eight corridor sides.
    double exact = 0;
    for (std::int64_t N = 10; N < 2'000'000; ++N) exact += 8 * oracle::long_cell_measure(d, 1, N, sigma);
    CHECK(std::abs(t.estimate() - exact) < 3 * t.se());
    const double lead = tail_leading(10, sigma, 2'000'000);
    CHECK(lead < exact);
  }

  RandomStream rng(53, StreamTag::Test, 0);
  CHECK_THROWS_AS(tail_prob(1.0, 0.1, 10, rng), InvalidConfig);
}

TEST_CASE("characteristic function increment") {
  RandomStream rng(61, StreamTag::Test, 0);
  const auto zero = char_increment({0, 0}, 0.1, 10'000, rng);
  CHECK(zero.real == 0.0);
  CHECK(zero.imag == 0.0);

  const Vec2 t{0.006, 0.008};
  const auto c = char_increment(t, 0.1, 1'000'000, rng);
  CHECK(std::abs(c.imag) <= 10 * dot(t, t));
  CHECK(c.real > 0);
  CHECK(c.prediction_4pi == doctest::Approx(2 * c.prediction_8pi));
  CHECK(c.ratio_8pi == doctest::Approx(2 * c.ratio_4pi));

  CHECK_THROWS_AS(char_increment({1.0, 0.0}, 0.1, 10, rng), InvalidConfig);
}
