#include "lorentz/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string>

#include "lorentz/errors.hpp"
#include "lorentz/parallel.hpp"
#include "lorentz/sampling.hpp"

namespace lorentz {

namespace {

constexpr double kPi = std::numbers::pi;

class Fnv1a {
 public:
  void bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_{0xcbf29ce484222325ULL};
};

// Runs fn(i) for every trial and returns the results in trial order.
template <typename T, typename Fn>
std::vector<T> per_trial(const ExperimentConfig &c, std::uint64_t total, Fn fn) {
  auto blocks = run_blocks(total, c.block_size, resolve_threads(c), [&](const BlockRange &r) {
    std::vector<T> out;
    out.reserve(r.end - r.begin);
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      try {
        out.push_back(fn(i));
      } catch (const FlightCapExceeded &e) {
        throw FlightCapExceeded("trajectory " + std::to_string(i) + ": " + e.what());
      }
    }
    return out;
  });
  std::vector<T> all;
  all.reserve(total);
  for (auto &b : blocks) all.insert(all.end(), b.begin(), b.end());
  return all;
}

// Runs fn(block) for every block of `total` samples, results in block order.
template <typename Fn>
auto per_block(const ExperimentConfig &c, std::uint64_t total, Fn fn) {
  return run_blocks(total, c.block_size, resolve_threads(c), fn);
}

double mean_of(const std::vector<double> &v) {
  return stats::pairwise_sum(v) / static_cast<double>(v.size());
}

struct Covariance {
  Matrix2 cov{};
  Matrix2 se{};
};

// Sample covariance of (x, y) with the SE of each entry taken from the
// spread of the centred products.
Covariance covariance(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = x.size();
  Covariance out;
  if (n < 2) return out;
  const double mx = mean_of(x), my = mean_of(y);
  const std::array<const std::vector<double> *, 2> cols{&x, &y};
  const std::array<double, 2> means{mx, my};
  std::vector<double> prod(n);
  for (int a = 0; a < 2; ++a) {
    for (int b = a; b < 2; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        prod[i] = ((*cols[a])[i] - means[a]) * ((*cols[b])[i] - means[b]);
      }
      const auto ms = stats::mean_se(prod);
      out.cov[a][b] = out.cov[b][a] = ms.mean * static_cast<double>(n) / static_cast<double>(n - 1);
      out.se[a][b] = out.se[b][a] = ms.se;
    }
  }
  return out;
}

double correlation(const std::vector<double> &x, const std::vector<double> &y) {
  const auto c = covariance(x, y);
  return c.cov[0][1] / std::sqrt(c.cov[0][0] * c.cov[1][1]);
}

}  // namespace

void validate(const ExperimentConfig &c) {
  if (!(c.sigma > 0.0 && c.sigma < 0.5)) throw InvalidConfig("sigma", "must lie in (0, 1/2)");
  if (c.n < 1) throw InvalidConfig("n", "must be at least 1");
  if (c.trials < 1) throw InvalidConfig("trials", "must be at least 1");
  if (c.H < 0.0) throw InvalidConfig("H", "must be positive");
  if (c.H_hat < 0.0) throw InvalidConfig("H_hat", "must be positive");
  if (c.H > 0.0 && c.H_hat > 0.0 && !(c.H < c.H_hat)) {
    throw InvalidConfig("H", "must be below H_hat");
  }
  if (c.j_max < 0 || c.j_max > 50) throw InvalidConfig("j_max", "must lie in [0, 50]");
  if (!(c.flight_cap > 0.0)) throw InvalidConfig("flight_cap", "must be positive");
  if (c.block_size < 1) throw InvalidConfig("block_size", "must be at least 1");
  for (double s : c.s_grid) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidConfig("s_grid", "entries must lie in (0, 1)");
  }
  for (const Vec2 &t : c.t_grid) {
    if (!(norm(t) < 1.0)) throw InvalidConfig("t_grid", "entries need |t| < 1");
  }
}

std::uint64_t config_hash(const ExperimentConfig &c) {
  Fnv1a h;
  h.f64(c.sigma);
  h.u64(c.n);
  h.u64(c.trials);
  h.u64(c.seed);
  h.u64(c.t_grid.size());
  for (const Vec2 &t : c.t_grid) {
    h.f64(t.x);
    h.f64(t.y);
  }
  h.u64(c.s_grid.size());
  for (double s : c.s_grid) h.f64(s);
  h.f64(c.H);
  h.f64(c.H_hat);
  h.u64(static_cast<std::uint64_t>(c.j_max));
  h.f64(c.flight_cap);
  h.u64(c.block_size);
  return h.value();
}

unsigned resolve_threads(const ExperimentConfig &c) {
  if (const char *env = std::getenv("LORENTZ_THREADS"); env && std::atoi(env) > 0) {
    return static_cast<unsigned>(std::atoi(env));
  }
  return c.threads > 0 ? c.threads : default_threads();
}

double b_n_sigma(std::uint64_t n, double sigma) {
  const double nn = static_cast<double>(n);
  return std::sqrt(nn * std::log(nn / (sigma * sigma))) / (std::sqrt(4.0 * kPi) * sigma);
}

BirkhoffResult birkhoff_kappa(CartesianState &state, std::uint64_t n, const TableParams &table,
                              std::span<const std::uint64_t> checkpoints) {
  BirkhoffResult r;
  r.checkpoints.reserve(checkpoints.size());
  std::size_t next = 0;
  std::vector<double> flights;
  flights.reserve(n);
  for (std::uint64_t k = 1; k <= n; ++k) {
    const Step s = advance(state, table);
    r.kappa += s.kappa;
    r.max_step = std::max(r.max_step, norm(s.kappa));
    flights.push_back(s.tau);
    while (next < checkpoints.size() && checkpoints[next] == k) {
      r.checkpoints.push_back(r.kappa);
      ++next;
    }
  }
  r.flight_time = stats::pairwise_sum(flights);
  return r;
}

BirkhoffResult birkhoff_kappa(const PhasePoint &x0, std::uint64_t n, const TableParams &table,
                              std::span<const std::uint64_t> checkpoints) {
  if (!(std::abs(x0.phi) < kPi / 2 - 1e-12)) throw GrazingLaunch("|phi| too close to pi/2");
  CartesianState s = to_state(x0);
  return birkhoff_kappa(s, n, table, checkpoints);
}

CltReport clt_experiment(const ExperimentConfig &c) {
  validate(c);
  const TableParams table(c.sigma, c.flight_cap);
  CltReport r;
  r.sigma = c.sigma;
  r.n = c.n;
  r.trials = c.trials;
  r.config_hash = config_hash(c);
  r.b = b_n_sigma(c.n, c.sigma);

  struct Trial {
    IVec2 kappa;
    double max_step;
  };
  const auto trials = per_trial<Trial>(c, c.trials, [&](std::uint64_t i) {
    RandomStream rng(c.seed, StreamTag::Clt, i);
    const auto res = birkhoff_kappa(sample_mu(rng), c.n, table);
    return Trial{res.kappa, res.max_step};
  });

  std::vector<double> x(trials.size()), y(trials.size());
  r.kappa.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    x[i] = static_cast<double>(trials[i].kappa.x) / r.b;
    y[i] = static_cast<double>(trials[i].kappa.y) / r.b;
    r.kappa.push_back(trials[i].kappa);
    r.max_step = std::max(r.max_step, trials[i].max_step);
  }
  const auto cov = covariance(x, y);
  r.cov = cov.cov;
  r.cov_se = cov.se;
  const double nn = static_cast<double>(c.n);
  if (c.n > 1) {
    const double f = r.b * r.b * 4.0 * kPi * c.sigma * c.sigma / (nn * std::log(nn));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) r.scaled_cov[a][b] = r.cov[a][b] * f;
  }
  auto cdf = [](double v) { return stats::normal_cdf(v, 0.0, 1.0 / kPi); };
  r.ks_x = stats::ks_one_sample(x, cdf);
  r.ks_y = stats::ks_one_sample(y, cdf);
  return r;
}

LltReport llt_experiment(const ExperimentConfig &c) {
  validate(c);
  const TableParams table(c.sigma, c.flight_cap);
  LltReport r;
  r.sigma = c.sigma;
  r.n = c.n;
  r.trials = c.trials;
  r.config_hash = config_hash(c);
  r.b = b_n_sigma(c.n, c.sigma);
  const double b2 = r.b * r.b;
  r.expected_hits = static_cast<double>(c.trials) * r.target / b2;
  if (r.expected_hits < 10.0) {
    throw InsufficientTrials("expected " + std::to_string(r.expected_hits) +
                             " returns to the origin cell; at least 10 are required");
  }
  if (r.expected_hits < 100.0) {
    r.warning = "expected returns below 100; the estimate is noisy";
  }
  const auto counts = per_block(c, c.trials, [&](const BlockRange &b) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = b.begin; i < b.end; ++i) {
      RandomStream rng(c.seed, StreamTag::Llt, i);
      try {
        if (birkhoff_kappa(sample_mu(rng), c.n, table).kappa == IVec2{0, 0}) ++hits;
      } catch (const FlightCapExceeded &e) {
        throw FlightCapExceeded("trajectory " + std::to_string(i) + ": " + e.what());
      }
    }
    return hits;
  });
  for (auto h : counts) r.hits += h;
  const auto p = stats::proportion(r.hits, c.trials);
  r.estimate = b2 * p.mean;
  r.se = b2 * p.se;
  return r;
}

WipReport wip_probe(const ExperimentConfig &c) {
  validate(c);
  if (c.s_grid.empty()) throw InvalidConfig("s_grid", "must not be empty");
  const TableParams table(c.sigma, c.flight_cap);
  WipReport r;
  r.sigma = c.sigma;
  r.n = c.n;
  r.trials = c.trials;
  r.config_hash = config_hash(c);
  r.b = b_n_sigma(c.n, c.sigma);

  std::vector<double> s = c.s_grid;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  s.push_back(1.0);
  std::vector<std::uint64_t> steps;
  for (double v : s) {
    steps.push_back(std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::floor(static_cast<double>(c.n) * v))));
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) throw InvalidConfig("s_grid", "points collapse at this n");
  }

  const auto trials = per_trial<std::vector<IVec2>>(c, c.trials, [&](std::uint64_t i) {
    RandomStream rng(c.seed, StreamTag::Wip, i);
    return birkhoff_kappa(sample_mu(rng), c.n, table, steps).checkpoints;
  });

  const std::size_t m = trials.size();
  auto column = [&](std::size_t k, bool ycoord, std::size_t from) {
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) {
      const IVec2 a = trials[i][k];
      const IVec2 base = from == 0 ? IVec2{0, 0} : trials[i][from - 1];
      v[i] = static_cast<double>(ycoord ? a.y - base.y : a.x - base.x) / r.b;
    }
    return v;
  };
  std::vector<Covariance> covs;
  for (std::size_t k = 0; k < s.size(); ++k) covs.push_back(covariance(column(k, false, 0), column(k, true, 0)));
  const double trace1 = covs.back().cov[0][0] + covs.back().cov[1][1];
  for (std::size_t k = 0; k < s.size(); ++k) {
    WipPoint p;
    p.s = s[k];
    p.step = steps[k];
    p.cov = covs[k].cov;
    p.cov_se = covs[k].se;
    p.ratio_to_linear = (p.cov[0][0] + p.cov[1][1]) / (s[k] * trace1);
    r.points.push_back(p);
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    WipIncrement inc;
    inc.s0 = k == 0 ? 0.0 : s[k - 1];
    inc.s1 = s[k];
    inc.cov = covariance(column(k, false, k), column(k, true, k)).cov;
    inc.ratio_to_linear = (inc.cov[0][0] + inc.cov[1][1]) / ((inc.s1 - inc.s0) * trace1);
    r.increments.push_back(inc);
  }
  const double rx = correlation(column(0, false, 0), column(1, false, 1));
  const double ry = correlation(column(0, true, 0), column(1, true, 1));
  r.increment_correlation = 0.5 * (rx + ry);
  r.increment_correlation_se = 1.0 / std::sqrt(2.0 * static_cast<double>(m));
  return r;
}

CorrReport correlation_experiment(const ExperimentConfig &c) {
  validate(c);
  const TableParams table(c.sigma, c.flight_cap);
  CorrReport r;
  r.sigma = c.sigma;
  r.n = c.n;
  r.trials = c.trials;
  r.config_hash = config_hash(c);
  r.H = c.H > 0.0 ? c.H : 100.0;
  r.H_hat = c.H_hat > 0.0 ? c.H_hat : 10.0 * r.H;
  if (!(r.H < r.H_hat)) throw InvalidConfig("H", "must be below H_hat");
  const int J = c.j_max;
  const std::size_t width = static_cast<std::size_t>(J + 1);
  constexpr std::size_t kSeries = 6;

  // Per trajectory: time averages over i < n of each lagged product.
  const auto trials = per_trial<std::vector<double>>(c, c.trials, [&](std::uint64_t t) {
    RandomStream rng(c.seed, StreamTag::Correlation, t);
    CartesianState st = to_state(sample_mu(rng));
    const std::uint64_t len = c.n + static_cast<std::uint64_t>(J);
    std::vector<IVec2> k(len);
    for (auto &v : k) v = advance(st, table).kappa;
    std::vector<double> x(len), y(len), tx(len), ty(len), len_all(len), len_short(len),
        len_over_h(len), len_over_hat(len);
    for (std::uint64_t i = 0; i < len; ++i) {
      x[i] = static_cast<double>(k[i].x);
      y[i] = static_cast<double>(k[i].y);
      len_all[i] = norm(k[i]);
      const bool in_h = len_all[i] <= r.H;
      tx[i] = in_h ? x[i] : 0.0;
      ty[i] = in_h ? y[i] : 0.0;
      len_short[i] = in_h ? len_all[i] : 0.0;
      len_over_h[i] = in_h ? 0.0 : len_all[i];
      len_over_hat[i] = len_all[i] <= r.H_hat ? 0.0 : len_all[i];
    }
    std::vector<double> acc(kSeries * width, 0.0);
    std::vector<double> terms(c.n);
    auto lagged = [&](std::size_t slot, auto product) {
      for (std::uint64_t i = 0; i < c.n; ++i) terms[i] = product(i);
      acc[slot] = mean_of(terms);
    };
    for (std::size_t j = 0; j < width; ++j) {
      lagged(0 * width + j, [&](std::uint64_t i) { return len_short[i] * len_over_hat[i + j]; });
      lagged(1 * width + j, [&](std::uint64_t i) { return len_over_h[i] * len_all[i + j]; });
      lagged(2 * width + j, [&](std::uint64_t i) { return x[i] * x[i + j]; });
      lagged(3 * width + j, [&](std::uint64_t i) { return y[i] * y[i + j]; });
      lagged(4 * width + j, [&](std::uint64_t i) { return x[i] * y[i + j]; });
      lagged(5 * width + j,
             [&](std::uint64_t i) { return tx[i] * tx[i + j] + ty[i] * ty[i + j]; });
    }
    return acc;
  });

  std::array<std::vector<LagEstimate> *, kSeries> out{&r.short_long, &r.long_any, &r.auto_xx,
                                                      &r.auto_yy,    &r.auto_xy,  &r.truncated};
  std::vector<double> col(trials.size());
  for (std::size_t s = 0; s < kSeries; ++s) {
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t t = 0; t < trials.size(); ++t) col[t] = trials[t][s * width + j];
      const auto ms = stats::mean_se(col);
      out[s]->push_back({ms.mean, ms.se});
    }
  }
  for (int j = 0; j <= J; ++j) r.lags.push_back(j);

  std::vector<double> fx, fy, fse;
  for (int j = 1; j <= J; ++j) {
    const auto &e = r.truncated[static_cast<std::size_t>(j)];
    if (std::abs(e.mean) > 3.0 * e.se && e.se > 0.0) {
      r.fit_lags.push_back(j);
      fx.push_back(j);
      fy.push_back(std::log(std::abs(e.mean)));
      fse.push_back(e.se / std::abs(e.mean));
    }
  }
  if (fx.size() >= 2) {
    const auto fit = stats::weighted_line_fit(fx, fy, fse);
    r.fit_valid = true;
    r.fit_slope = fit.slope;
    r.fit_slope_se = fit.slope_se;
    r.fit_slope_upper95 = fit.slope + 1.959963984540054 * fit.slope_se;
  }
  return r;
}

InvarianceReport invariance_test(const ExperimentConfig &c, int steps) {
  validate(c);
  if (steps < 0) throw InvalidConfig("steps", "must be non-negative");
  const TableParams table(c.sigma, c.flight_cap);
  InvarianceReport r;
  r.samples = c.trials;
  r.steps = steps;
  r.sigma = c.sigma;
  r.config_hash = config_hash(c);
  using Pair = std::pair<double, double>;
  auto pushed = per_trial<Pair>(c, c.trials, [&](std::uint64_t i) {
    RandomStream rng(c.seed, StreamTag::Invariance, i);
    CartesianState s = to_state(sample_mu(rng));
    for (int k = 0; k < steps; ++k) advance(s, table);
    const PhasePoint p = to_phase(s);
    return Pair{p.theta, p.phi};
  });
  auto fresh = per_trial<Pair>(c, c.trials, [&](std::uint64_t i) {
    RandomStream rng(c.seed, StreamTag::InvarianceFresh, i);
    const PhasePoint p = sample_mu(rng);
    return Pair{p.theta, p.phi};
  });
  std::vector<double> a(pushed.size()), b(fresh.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = pushed[i].first;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = fresh[i].first;
  r.ks_theta = stats::ks_two_sample(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = pushed[i].second;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = fresh[i].second;
  r.ks_phi = stats::ks_two_sample(a, b);
  return r;
}

FlightReport flight_time_experiment(const ExperimentConfig &c) {
  validate(c);
  const TableParams table(c.sigma, c.flight_cap);
  FlightReport r;
  r.collisions = c.n * c.trials;
  r.config_hash = config_hash(c);
  r.expected = (1.0 - kPi * c.sigma * c.sigma) / (2.0 * c.sigma);
  const auto means = per_trial<double>(c, c.trials, [&](std::uint64_t i) {
    RandomStream rng(c.seed, StreamTag::FlightTime, i);
    return birkhoff_kappa(sample_mu(rng), c.n, table).flight_time / static_cast<double>(c.n);
  });
  const auto ms = stats::mean_se(means);
  r.mean_tau = ms.mean;
  r.se = ms.se;
  return r;
}

TailReport tail_experiment(const ExperimentConfig &c, const std::vector<double> &H) {
  validate(c);
  if (H.empty()) throw InvalidConfig("H", "tail grid must not be empty");
  for (double h : H) {
    if (!(h >= 2.0)) throw InvalidConfig("H", "tail levels must be at least 2");
  }
  TailReport r;
  r.sigma = c.sigma;
  r.samples = c.trials;
  r.config_hash = config_hash(c);
  const auto blocks = per_block(c, c.trials, [&](const BlockRange &b) {
    RandomStream rng(c.seed, StreamTag::TailProb, b.index);
    return tail_counts(H, c.sigma, b.end - b.begin, rng);
  });
  std::vector<double> lx, ly, lse;
  for (std::size_t k = 0; k < H.size(); ++k) {
    CountEstimate total;
    for (const auto &b : blocks) total += b[k];
    TailPoint p;
    p.H = H[k];
    p.hits = total.hits;
    p.estimate = total.estimate();
    p.se = total.se();
    p.leading = tail_leading(H[k], c.sigma, 200000);
    r.points.push_back(p);
    if (p.hits > 0) {
      lx.push_back(std::log(p.H));
      ly.push_back(std::log(p.estimate));
      lse.push_back(p.se / p.estimate);
    }
  }
  if (lx.size() >= 2) {
    r.fit = stats::line_fit(lx, ly);
    r.weighted_fit = stats::weighted_line_fit(lx, ly, lse);
  }
  return r;
}

CellMeasureReport cell_measure_experiment(const ExperimentConfig &c, const IVec2 &xi,
                                          std::int64_t N, bool stratified) {
  validate(c);
  const CellId cell = make_cell(xi, N, c.sigma);
  const auto lead = cell_measure_leading(cell, c.sigma);
  CellMeasureReport r;
  r.xi = xi;
  r.N = N;
  r.kappa = cell.kappa();
  r.sigma = c.sigma;
  r.samples = c.trials;
  r.config_hash = config_hash(c);
  r.stratified = stratified;
  r.leading = lead.value;
  r.regime = lead.regime == CellRegime::Near ? "near" : "far";
  if (stratified) {
    const auto blocks = per_block(c, c.trials, [&](const BlockRange &b) {
      RandomStream rng(c.seed, StreamTag::CellStratified, b.index);
      return cell_measure_stratified(cell, c.sigma, b.end - b.begin, rng);
    });
    std::vector<stats::Moments> parts;
    for (const auto &b : blocks) parts.push_back(b.weights);
    StratifiedEstimate total;
    total.scale = blocks.front().scale;
    total.weights = stats::merge(parts);
    r.estimate = total.estimate();
    r.se = total.se();
  } else {
    const auto blocks = per_block(c, c.trials, [&](const BlockRange &b) {
      RandomStream rng(c.seed, StreamTag::CellMeasure, b.index);
      return cell_measure_mc(cell, c.sigma, b.end - b.begin, rng);
    });
    CountEstimate total;
    for (const auto &b : blocks) total += b;
    r.estimate = total.estimate();
    r.se = total.se();
  }
  r.ratio = r.estimate / r.leading;
  return r;
}

CharIncrementReport char_increment_experiment(const ExperimentConfig &c) {
  validate(c);
  CharIncrementReport r;
  r.sigma = c.sigma;
  r.samples = c.trials;
  r.config_hash = config_hash(c);
  r.t = c.t_grid.empty() ? std::vector<Vec2>{{1e-3, 0.0}} : c.t_grid;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const Vec2 t = r.t[k];
    const auto blocks = per_block(c, c.trials, [&](const BlockRange &b) {
      RandomStream rng(c.seed, StreamTag::CharIncrement, (std::uint64_t{k} << 40) | b.index);
      return char_increment_moments(t, c.sigma, b.end - b.begin, rng);
    });
    std::vector<stats::Moments> re, im;
    for (const auto &b : blocks) {
      re.push_back(b.real);
      im.push_back(b.imag);
    }
    const IncrementMoments total{stats::merge(re), stats::merge(im)};
    const auto v = char_increment_report(t, c.sigma, total);
    r.values.push_back(v);
    r.better.push_back(std::abs(std::log(v.ratio_8pi)) < std::abs(std::log(v.ratio_4pi)) ? "8pi"
                                                                                        : "4pi");
  }
  return r;
}

LpReport lp_norm_experiment(const ExperimentConfig &c, double p) {
  validate(c);
  if (!(p >= 1.0 && p < 2.0)) {
    throw ExponentOutOfRange("p = " + std::to_string(p) + " must lie in [1, 2)");
  }
  const auto blocks = per_block(c, c.trials, [&](const BlockRange &b) {
    RandomStream rng(c.seed, StreamTag::LpNorm, b.index);
    return kappa_power_samples(p, c.sigma, b.end - b.begin, rng);
  });
  std::vector<double> all;
  all.reserve(c.trials);
  for (const auto &b : blocks) all.insert(all.end(), b.begin(), b.end());
  RandomStream boot(c.seed, StreamTag::LpBootstrap, 0);
  LpReport r;
  r.sigma = c.sigma;
  r.config_hash = config_hash(c);
  r.value = lp_norm_from_samples(p, c.sigma, all, boot);
  return r;
}

}  // namespace lorentz
