#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lorentz::stats {

/// Recursive pairwise sum with a fixed split: the result depends only on the
/// order of `values`, never on how they were produced.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of a sample (SE of the mean, n - 1 denominator).
struct MeanSe {
  double mean{0.0};
  double se{0.0};
  std::size_t n{0};
};

/// Moments gathered block by block. Every block is reduced in index order and
/// blocks are merged with pairwise_sum, so totals are scheduling independent.
struct Moments {
  std::size_t n{0};
  double sum{0.0};
  double sum_sq{0.0};
};

Moments merge(std::span<const Moments> blocks);
MeanSe mean_se(const Moments &m);
MeanSe mean_se(std::span<const double> sample);

/// Binomial proportion with its standard error.
MeanSe proportion(std::size_t hits, std::size_t trials);

double normal_cdf(double x, double mean = 0.0, double variance = 1.0);

/// One-sample KS distance sup |F_n - F| against a continuous CDF. The sample
/// is sorted in place.
double ks_one_sample(std::vector<double> &sample, const std::function<double(double)> &cdf);

/// Two-sample KS distance sup |F_n - G_m|. Both samples are sorted in place.
double ks_two_sample(std::vector<double> &a, std::vector<double> &b);

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

/// Weighted least squares fit y = intercept + slope * x with known standard
/// errors on y. slope_se comes from the inverse normal matrix.
struct LinearFit {
  double intercept{0.0};
  double slope{0.0};
  double slope_se{0.0};
  std::size_t points{0};
};

LinearFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                            std::span<const double> y_se);
LinearFit line_fit(std::span<const double> x, std::span<const double> y);

}  // namespace lorentz::stats
