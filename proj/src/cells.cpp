#include "lorentz/cells.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lorentz/errors.hpp"
#include "lorentz/sampling.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal frame of a corridor: e along xi, f across towards xi'.
struct Frame {
  Vec2 e;
  Vec2 f;
  double len;
  IVec2 xi_prime;

  Vec2 to_world(double a, double b) const { return a * e + b * f; }
};

Frame corridor_frame(const IVec2 &xi) {
  const auto [xp, unused] = convergent_pair(xi);
  (void)unused;
  Frame fr;
  fr.len = norm(xi);
  fr.e = (1.0 / fr.len) * to_real(xi);
  const double side = cross(xi, xp) > 0 ? 1.0 : -1.0;
  fr.f = side * Vec2{-fr.e.y, fr.e.x};
  fr.xi_prime = xp;
  return fr;
}

IVec2 one_step_kappa(const TableParams &table, RandomStream &rng) {
  CartesianState s = to_state(sample_mu(rng));
  return advance(s, table).kappa;
}

}  // namespace

CellId make_cell(const IVec2 &xi, std::int64_t N, double sigma) {
  if (N < 1) throw InvalidConfig("N", "cell index must be at least 1");
  const auto [xp, unused] = convergent_pair(xi);
  (void)unused;
  return {{xi, xp, corridor_width(xi, sigma)}, N};
}

LeadingMeasure cell_measure_leading(const CellId &cell, double sigma) {
  const double d = corridor_width(cell.corridor.xi, sigma);
  if (d <= 0.0) throw ClosedCorridor("corridor has zero width at this sigma");
  if (cell.N < 1) throw InvalidConfig("N", "cell index must be at least 1");
  const double n = static_cast<double>(cell.N);
  const double near = 4.0 * sigma * sigma;
  const double far = d * d / (n * n);
  LeadingMeasure m;
  m.regime = 2.0 * sigma > d / n ? CellRegime::Near : CellRegime::Far;
  m.value = std::min(near, far) / (4.0 * kPi * n * norm(cell.corridor.xi) * sigma);
  return m;
}

double CountEstimate::estimate() const { return stats::proportion(hits, trials).mean; }
double CountEstimate::se() const { return stats::proportion(hits, trials).se; }

CountEstimate cell_measure_mc(const CellId &cell, double sigma, std::uint64_t samples,
                              RandomStream &rng) {
  const TableParams table(sigma);
  const IVec2 target = cell.kappa();
  CountEstimate c;
  c.trials = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (one_step_kappa(table, rng) == target) ++c.hits;
  }
  return c;
}

double StratifiedEstimate::estimate() const { return scale * stats::mean_se(weights).mean; }
double StratifiedEstimate::se() const { return scale * stats::mean_se(weights).se; }

void merge_into(StratifiedEstimate &into, const StratifiedEstimate &part) {
  into.scale = part.scale;
  into.weights.n += part.weights.n;
  into.weights.sum += part.weights.sum;
  into.weights.sum_sq += part.weights.sum_sq;
}

StratifiedEstimate cell_measure_stratified(const CellId &cell, double sigma,
                                           std::uint64_t samples, RandomStream &rng) {
  const TableParams table(sigma);
  const IVec2 target = cell.kappa();
  const double dist = norm(target);
  // Every segment from O_0 to O_kappa has direction within this cone.
  const double half = std::asin(std::min(1.0, 2.0 * sigma / dist));
  const double centre = std::atan2(static_cast<double>(target.y), static_cast<double>(target.x));
  StratifiedEstimate out;
  out.scale = 2.0 * kPi * (2.0 * half);
  out.weights.n = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double theta = 2.0 * kPi * rng.uniform();
    const double beta = centre + half * (2.0 * rng.uniform() - 1.0);
    // Direction polar angle beta = pi/2 - theta - phi.
    const double phi = wrap_difference(kPi / 2 - theta - beta);
    if (std::abs(phi) >= kPi / 2 - 1e-12) continue;
    CartesianState s = to_state({theta, phi, {0, 0}});
    if (advance(s, table).kappa != target) continue;
    const double w = std::cos(phi) / (4.0 * kPi);
    out.weights.sum += w;
    out.weights.sum_sq += w * w;
  }
  return out;
}

SingularityAngles singularity_angles(const IVec2 &xi, std::int64_t M, double sigma) {
  const double d = corridor_width(xi, sigma);
  if (d <= 0.0) throw ClosedCorridor("corridor has zero width at this sigma");
  if (M < 2) throw InvalidConfig("M", "must be at least 2");
  const Frame fr = corridor_frame(xi);
  const double m = static_cast<double>(M);
  const double height = 1.0 / fr.len;
  const double along = dot(to_real(fr.xi_prime), fr.e);

  SingularityAngles out;
  const Vec2 top = fr.to_world(0.0, sigma);
  out.theta_minus_xi = wrap_angle(std::atan2(top.x, top.y));

  // Cross tangent of O_0 (below) and O_kappa (above), kappa = xi' - M xi.
  const double l0 = m * fr.len - along;
  const double d0 = std::hypot(l0, height);
  if (2.0 * sigma >= d0) throw NoTangentIntersection("disks O_0 and O_kappa overlap");
  const double beta = std::atan2(height, l0) - std::asin(2.0 * sigma / d0);
  const Vec2 touch = fr.to_world(sigma * std::sin(beta), sigma * std::cos(beta));
  out.theta_kappa = wrap_angle(std::atan2(touch.x, touch.y));
  out.theta_gap = std::abs(wrap_difference(out.theta_minus_xi - out.theta_kappa));

  // Cross tangent of O_-xi (below) and O_kappa (above), continued onto O_0.
  const double l1 = (m - 1.0) * fr.len - along;
  const double d1 = std::hypot(l1, height);
  if (2.0 * sigma >= d1) throw NoTangentIntersection("disks O_-xi and O_kappa overlap");
  const double alpha = std::atan2(height, l1) - std::asin(2.0 * sigma / d1);
  // Line {X : n.X = c} with upward normal n = (sin a, cos a) in the frame.
  const double c = -fr.len * std::sin(alpha) + sigma;
  if (!(std::abs(c) < sigma)) {
    throw NoTangentIntersection("tangent line misses O_0");
  }
  const double half_chord = std::sqrt((sigma - c) * (sigma + c));
  out.phi_gap = std::asin(half_chord / sigma);

  // Signed outgoing angle at the entry point, in the table's chart.
  const double va = std::cos(alpha), vb = -std::sin(alpha);
  const double na = std::sin(alpha), nb = std::cos(alpha);
  const double pa = c * na - half_chord * va, pb = c * nb - half_chord * vb;
  CartesianState s;
  s.cell = {0, 0};
  s.normal = normalized(fr.to_world(pa, pb));
  const Vec2 v = fr.to_world(va, vb);
  s.velocity = normalized(v - 2.0 * dot(v, s.normal) * s.normal);
  out.phi_prime_kappa = to_phase(s).phi;

  out.theta_gap_predicted = d / (fr.len * m);
  out.phi_gap_predicted = std::sqrt(2.0 * d / (sigma * m));
  return out;
}

PhasePoint chart_to_phase(double theta, double phi, const IVec2 &xi, double /*sigma*/) {
  const Frame fr = corridor_frame(xi);
  const double alpha = kPi / 2 - theta - phi;
  CartesianState s;
  s.cell = {0, 0};
  s.normal = fr.to_world(std::sin(theta), std::cos(theta));
  s.velocity = fr.to_world(std::cos(alpha), std::sin(alpha));
  return to_phase(s);
}

std::pair<double, double> chart_from_phase(const PhasePoint &p, const IVec2 &xi) {
  const Frame fr = corridor_frame(xi);
  const CartesianState s = to_state(p);
  const double theta = std::atan2(dot(s.normal, fr.e), dot(s.normal, fr.f));
  const double alpha = std::atan2(dot(s.velocity, fr.f), dot(s.velocity, fr.e));
  return {theta, wrap_difference(kPi / 2 - theta - alpha)};
}

VolumeCheck volume_form_check(double theta, double phi, const IVec2 &xi, double sigma,
                              double h) {
  if (!(h > 0.0)) throw InvalidConfig("h", "finite-difference step must be positive");
  const TableParams table(sigma);
  const Frame fr = corridor_frame(xi);
  const PhasePoint p = chart_to_phase(theta, phi, xi, sigma);
  if (!(std::abs(p.phi) < kPi / 2)) throw ChartViolation("launch does not leave O_0");
  const IVec2 rel = billiard_map(p, table).kappa - fr.xi_prime;
  if (cross(rel, xi) != 0 || dot(rel, xi) <= 0) {
    throw ChartViolation("next collision is not on the opposite corridor wall");
  }

  auto chart = [&](double th, double ph) {
    const double a = kPi / 2 - th - ph;
    const double z = sigma / fr.len * ((1.0 - std::cos(th)) / std::tan(a) + std::sin(th));
    return std::make_pair(a, z);
  };
  const auto [a0, z0] = chart(theta, phi);
  const auto [a_t, z_t] = chart(theta + h, phi);
  const auto [a_p, z_p] = chart(theta, phi + h);
  const double da_dt = (a_t - a0) / h, da_dp = (a_p - a0) / h;
  const double dz_dt = (z_t - z0) / h, dz_dp = (z_p - z0) / h;
  const double det = std::abs(da_dt * dz_dp - da_dp * dz_dt);

  VolumeCheck out;
  out.alpha = a0;
  out.z = z0;
  out.angle_identity = theta + a0 + phi - kPi / 2;
  out.lhs = fr.len / (4.0 * kPi * sigma) * std::sin(a0) * det;
  out.rhs = std::cos(phi) / (4.0 * kPi);
  out.discrepancy = std::abs(out.lhs / out.rhs - 1.0);
  return out;
}

std::vector<double> kappa_power_samples(double p, double sigma, std::uint64_t samples,
                                        RandomStream &rng) {
  if (!(p >= 1.0 && p < 2.0)) {
    throw ExponentOutOfRange("p = " + std::to_string(p) + " must lie in [1, 2)");
  }
  const TableParams table(sigma);
  std::vector<double> out;
  out.reserve(samples);
  for (std::uint64_t i = 0; i < samples; ++i) {
    out.push_back(std::pow(norm(one_step_kappa(table, rng)), p));
  }
  return out;
}

LpNormEstimate lp_norm_from_samples(double p, double sigma, const std::vector<double> &values,
                                    RandomStream &bootstrap_rng, int resamples) {
  if (values.empty()) throw EmptyData("no samples for the L^p estimate");
  LpNormEstimate out;
  out.p = p;
  out.samples = values.size();
  out.estimate = std::pow(stats::pairwise_sum(values) / static_cast<double>(values.size()), 1.0 / p);
  std::vector<double> boot;
  boot.reserve(static_cast<std::size_t>(resamples));
  const auto n = values.size();
  for (int b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += values[std::min(n - 1, static_cast<std::size_t>(bootstrap_rng.uniform() * n))];
    }
    boot.push_back(std::pow(s / static_cast<double>(n), 1.0 / p));
  }
  const auto ms = stats::mean_se(boot);
  out.se = ms.se * std::sqrt(static_cast<double>(boot.size()));  // spread, not SE of the mean
  out.fitted_constant = out.estimate * sigma * std::pow(p * (2.0 - p), 1.0 / p);
  return out;
}

LpNormEstimate kappa_lp_norm_mc(double p, double sigma, std::uint64_t samples,
                                RandomStream &rng) {
  const auto values = kappa_power_samples(p, sigma, samples, rng);
  return lp_norm_from_samples(p, sigma, values, rng);
}

std::vector<CountEstimate> tail_counts(const std::vector<double> &H, double sigma,
                                       std::uint64_t samples, RandomStream &rng) {
  const TableParams table(sigma);
  std::vector<CountEstimate> out(H.size());
  for (auto &c : out) c.trials = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double len = norm(one_step_kappa(table, rng));
    for (std::size_t j = 0; j < H.size(); ++j) {
      if (len > H[j]) ++out[j].hits;
    }
  }
  return out;
}

CountEstimate tail_prob(double H, double sigma, std::uint64_t samples, RandomStream &rng) {
  if (!(H >= 2.0)) throw InvalidConfig("H", "must be at least 2");
  return tail_counts({H}, sigma, samples, rng).front();
}

double tail_leading(double H, double sigma, std::int64_t n_max) {
  const CorridorSet set = enumerate_corridors(sigma);
  double total = 0.0;
  for (const auto &e : set.entries) {
    for (std::int64_t N = 1; N <= n_max; ++N) {
      const CellId cell{e, N};
      if (norm(cell.kappa()) <= H) continue;
      total += cell_measure_leading(cell, sigma).value;
    }
  }
  return total;
}

IncrementMoments char_increment_moments(const Vec2 &t, double sigma, std::uint64_t samples,
                                        RandomStream &rng) {
  const TableParams table(sigma);
  IncrementMoments m;
  m.real.n = m.imag.n = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const IVec2 k = one_step_kappa(table, rng);
    const double arg = dot(t, to_real(k));
    const double re = 1.0 - std::cos(arg);
    const double im = -std::sin(arg);
    m.real.sum += re;
    m.real.sum_sq += re * re;
    m.imag.sum += im;
    m.imag.sum_sq += im * im;
  }
  return m;
}

CharIncrement char_increment_report(const Vec2 &t, double sigma, const IncrementMoments &m) {
  CharIncrement out;
  const auto re = stats::mean_se(m.real);
  const auto im = stats::mean_se(m.imag);
  out.real = re.mean;
  out.real_se = re.se;
  out.imag = im.mean;
  out.imag_se = im.se;
  const double len = norm(t);
  if (len == 0.0) return out;
  out.abar = abar(t, sigma);
  const double lg = std::log(1.0 / len);
  out.prediction_4pi = out.abar * lg / (4.0 * kPi * sigma);
  out.prediction_8pi = out.abar * lg / (8.0 * kPi * sigma);
  out.ratio_4pi = out.real / out.prediction_4pi;
  out.ratio_8pi = out.real / out.prediction_8pi;
  return out;
}

CharIncrement char_increment(const Vec2 &t, double sigma, std::uint64_t samples,
                             RandomStream &rng) {
  if (!(norm(t) < 1.0)) throw InvalidConfig("t", "|t| must be below 1");
  return char_increment_report(t, sigma, char_increment_moments(t, sigma, samples, rng));
}

}  // namespace lorentz
