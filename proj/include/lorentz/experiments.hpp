#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lorentz/cells.hpp"
#include "lorentz/dynamics.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

namespace lorentz {

struct ExperimentConfig {
  double sigma{0.1};
  std::uint64_t n{1000};
  std::uint64_t trials{10000};
  std::uint64_t seed{1};
  std::vector<Vec2> t_grid;
  std::vector<double> s_grid;
  double H{0.0};      // 0 = unset
  double H_hat{0.0};  // 0 = unset
  int j_max{10};
  double flight_cap{1e6};
  unsigned threads{0};  // 0 = default_threads()
  /// Trials per work unit. Results never depend on the worker count; they
  /// may depend on block_size, which is therefore part of the hash.
  std::uint64_t block_size{1024};
};

/// Throws InvalidConfig naming the offending field.
void validate(const ExperimentConfig &c);

/// FNV-1a over every field that can change a result (not `threads`).
std::uint64_t config_hash(const ExperimentConfig &c);

/// LORENTZ_THREADS, then c.threads, then the hardware concurrency.
unsigned resolve_threads(const ExperimentConfig &c);

/// sqrt(n log(n / sigma^2)) / (sqrt(4 pi) sigma), natural log.
double b_n_sigma(std::uint64_t n, double sigma);

struct BirkhoffResult {
  IVec2 kappa;
  double max_step{0.0};  // largest single |kappa|
  double flight_time{0.0};
  std::vector<IVec2> checkpoints;  // kappa after each requested step count
};

/// Advances `state` n collisions in place. `checkpoints` must be increasing.
BirkhoffResult birkhoff_kappa(CartesianState &state, std::uint64_t n, const TableParams &table,
                              std::span<const std::uint64_t> checkpoints = {});
BirkhoffResult birkhoff_kappa(const PhasePoint &x0, std::uint64_t n, const TableParams &table,
                              std::span<const std::uint64_t> checkpoints = {});

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct CltReport {
  double sigma{0.0};
  std::uint64_t n{0};
  std::uint64_t trials{0};
  std::uint64_t config_hash{0};
  double b{0.0};
  Matrix2 cov{};     // of kappa_n / b
  Matrix2 cov_se{};
  double ks_x{0.0};  // against N(0, 1/pi)
  double ks_y{0.0};
  Matrix2 scaled_cov{};  // 4 pi sigma^2 Cov(kappa_n) / (n log n)
  double max_step{0.0};
  std::vector<IVec2> kappa;  // per trial, in trial order
};

CltReport clt_experiment(const ExperimentConfig &c);

struct LltReport {
  double sigma{0.0};
  std::uint64_t n{0};
  std::uint64_t trials{0};
  std::uint64_t config_hash{0};
  double b{0.0};
  std::uint64_t hits{0};
  double estimate{0.0};  // b^2 * hits / trials
  double se{0.0};
  double target{0.5};
  double expected_hits{0.0};
  std::string warning;  // set when expected hits < 100
};

/// Throws InsufficientTrials when fewer than 10 hits are expected.
LltReport llt_experiment(const ExperimentConfig &c);

struct WipPoint {
  double s{0.0};
  std::uint64_t step{0};
  Matrix2 cov{};
  Matrix2 cov_se{};
  double ratio_to_linear{0.0};  // trace(cov) / (s trace(cov at s = 1))
};

struct WipIncrement {
  double s0{0.0};
  double s1{0.0};
  Matrix2 cov{};
  double ratio_to_linear{0.0};  // trace(cov) / ((s1 - s0) trace(cov at s = 1))
};

struct WipReport {
  double sigma{0.0};
  std::uint64_t n{0};
  std::uint64_t trials{0};
  std::uint64_t config_hash{0};
  double b{0.0};
  std::vector<WipPoint> points;  // s_grid in increasing order, then s = 1
  std::vector<WipIncrement> increments;
  /// Correlation of the first two disjoint increments, averaged over both
  /// coordinates, with its normal-approximation SE.
  double increment_correlation{0.0};
  double increment_correlation_se{0.0};
};

WipReport wip_probe(const ExperimentConfig &c);

struct LagEstimate {
  double mean{0.0};
  double se{0.0};
};

struct CorrReport {
  double sigma{0.0};
  std::uint64_t n{0};
  std::uint64_t trials{0};
  std::uint64_t config_hash{0};
  double H{0.0};
  double H_hat{0.0};
  std::vector<int> lags;                     // 0..j_max
  std::vector<LagEstimate> short_long;       // E|k'| |k''''| o T^j
  std::vector<LagEstimate> long_any;         // E|k''| |k| o T^j
  std::vector<LagEstimate> auto_xx;          // E k_x k_x o T^j
  std::vector<LagEstimate> auto_yy;
  std::vector<LagEstimate> auto_xy;
  std::vector<LagEstimate> truncated;        // E k' . k' o T^j
  /// Weighted fit of log|truncated| on lags j >= 1 above 3 SE.
  bool fit_valid{false};
  std::vector<int> fit_lags;
  double fit_slope{0.0};
  double fit_slope_se{0.0};
  double fit_slope_upper95{0.0};
};

CorrReport correlation_experiment(const ExperimentConfig &c);

struct InvarianceReport {
  std::uint64_t samples{0};
  int steps{0};
  double sigma{0.0};
  std::uint64_t config_hash{0};
  double ks_theta{0.0};
  double ks_phi{0.0};
};

/// Pushes config.trials mu-samples forward `steps` collisions and compares
/// the theta and phi marginals with fresh mu-samples.
InvarianceReport invariance_test(const ExperimentConfig &c, int steps);

struct FlightReport {
  std::uint64_t collisions{0};
  std::uint64_t config_hash{0};
  double mean_tau{0.0};
  double se{0.0};
  double expected{0.0};  // (1 - pi sigma^2) / (2 sigma)
};

/// Mean free flight over config.trials trajectories of config.n collisions.
FlightReport flight_time_experiment(const ExperimentConfig &c);

struct TailPoint {
  double H{0.0};
  std::uint64_t hits{0};
  double estimate{0.0};
  double se{0.0};
  double leading{0.0};
};

struct TailReport {
  double sigma{0.0};
  std::uint64_t samples{0};
  std::uint64_t config_hash{0};
  std::vector<TailPoint> points;
  stats::LinearFit fit;           // ordinary least squares of log tail on log H
  stats::LinearFit weighted_fit;  // inverse-variance weights; leans on the smallest H
};

TailReport tail_experiment(const ExperimentConfig &c, const std::vector<double> &H);

struct CellMeasureReport {
  IVec2 xi;
  std::int64_t N{0};
  IVec2 kappa;
  double sigma{0.0};
  std::uint64_t samples{0};
  std::uint64_t config_hash{0};
  bool stratified{false};
  double leading{0.0};
  std::string regime;
  double estimate{0.0};
  double se{0.0};
  double ratio{0.0};  // estimate / leading
};

CellMeasureReport cell_measure_experiment(const ExperimentConfig &c, const IVec2 &xi,
                                          std::int64_t N, bool stratified);

struct CharIncrementReport {
  double sigma{0.0};
  std::uint64_t samples{0};
  std::uint64_t config_hash{0};
  std::vector<Vec2> t;
  std::vector<CharIncrement> values;
  /// "4pi" or "8pi" per t, whichever ratio is closer to 1.
  std::vector<std::string> better;
};

CharIncrementReport char_increment_experiment(const ExperimentConfig &c);

struct LpReport {
  double sigma{0.0};
  std::uint64_t config_hash{0};
  LpNormEstimate value;
};

LpReport lp_norm_experiment(const ExperimentConfig &c, double p);

}  // namespace lorentz
