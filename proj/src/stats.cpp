#include "lorentz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lorentz::stats {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Moments merge(std::span<const Moments> blocks) {
  std::vector<double> sums;
  std::vector<double> squares;
  sums.reserve(blocks.size());
  squares.reserve(blocks.size());
  Moments out;
  for (const auto &b : blocks) {
    out.n += b.n;
    sums.push_back(b.sum);
    squares.push_back(b.sum_sq);
  }
  out.sum = pairwise_sum(sums);
  out.sum_sq = pairwise_sum(squares);
  return out;
}

MeanSe mean_se(const Moments &m) {
  MeanSe r;
  r.n = m.n;
  if (m.n == 0) return r;
  const double n = static_cast<double>(m.n);
  r.mean = m.sum / n;
  if (m.n > 1) {
    const double var = std::max(0.0, (m.sum_sq - n * r.mean * r.mean) / (n - 1.0));
    r.se = std::sqrt(var / n);
  }
  return r;
}

MeanSe mean_se(std::span<const double> sample) {
  Moments m;
  m.n = sample.size();
  std::vector<double> sq(sample.size());
  std::transform(sample.begin(), sample.end(), sq.begin(), [](double v) { return v * v; });
  m.sum = pairwise_sum(sample);
  m.sum_sq = pairwise_sum(sq);
  // Two-pass variance for accuracy on small samples.
  MeanSe r = mean_se(m);
  if (sample.size() > 1) {
    std::vector<double> dev(sample.size());
    std::transform(sample.begin(), sample.end(), dev.begin(),
                   [&](double v) { return (v - r.mean) * (v - r.mean); });
    const double var = pairwise_sum(dev) / static_cast<double>(sample.size() - 1);
    r.se = std::sqrt(var / static_cast<double>(sample.size()));
  }
  return r;
}

MeanSe proportion(std::size_t hits, std::size_t trials) {
  MeanSe r;
  r.n = trials;
  if (trials == 0) return r;
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  r.mean = p;
  r.se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return r;
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double ks_one_sample(std::vector<double> &sample, const std::function<double(double)> &cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> &a, std::vector<double> &b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

LinearFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                            std::span<const double> y_se) {
  if (x.size() != y.size() || x.size() != y_se.size())
    throw std::invalid_argument("weighted_line_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("weighted_line_fit: need two points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (y_se[i] * y_se[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LinearFit f;
  f.points = x.size();
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.slope_se = std::sqrt(sw / det);
  return f;
}

LinearFit line_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("line_fit: need two points of matching size");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

}  // namespace lorentz::stats
