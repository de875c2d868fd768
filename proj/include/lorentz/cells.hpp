#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lorentz/corridors.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/stats.hpp"

namespace lorentz {

/// The set where kappa = xi' + N xi.
struct CellId {
  CorridorKey corridor;
  std::int64_t N{1};

  IVec2 kappa() const { return corridor.xi_prime + N * corridor.xi; }
};

/// Cell for direction xi, taking xi' as the first convergent neighbour.
CellId make_cell(const IVec2 &xi, std::int64_t N, double sigma);

enum class CellRegime { Near, Far };

struct LeadingMeasure {
  double value{0.0};
  CellRegime regime{CellRegime::Near};
};

/// (1/(4 pi N |xi| sigma)) min{4 sigma^2, d^2/N^2}. Near when 2 sigma > d/N.
LeadingMeasure cell_measure_leading(const CellId &cell, double sigma);

/// Hit counter with a binomial standard error; merges by addition.
struct CountEstimate {
  std::uint64_t hits{0};
  std::uint64_t trials{0};

  double estimate() const;
  double se() const;
  CountEstimate &operator+=(const CountEstimate &o) {
    hits += o.hits;
    trials += o.trials;
    return *this;
  }
};

/// Plain Monte Carlo: the fraction of mu-samples whose one-step kappa is the
/// cell's displacement.
CountEstimate cell_measure_mc(const CellId &cell, double sigma, std::uint64_t samples,
                              RandomStream &rng);

/// Importance-restricted estimator: theta uniform, outgoing direction angle
/// uniform on the cone of lines meeting both O_0 and O_kappa. The estimate is
/// scale * mean(weight).
struct StratifiedEstimate {
  stats::Moments weights;
  double scale{0.0};

  double estimate() const;
  double se() const;
};

StratifiedEstimate cell_measure_stratified(const CellId &cell, double sigma,
                                           std::uint64_t samples, RandomStream &rng);
void merge_into(StratifiedEstimate &into, const StratifiedEstimate &part);

struct SingularityAngles {
  double theta_minus_xi{0.0};
  double theta_kappa{0.0};
  double phi_prime_kappa{0.0};
  /// |theta_minus_xi - theta_kappa| and pi/2 - |phi'| from exact geometry.
  double theta_gap{0.0};
  double phi_gap{0.0};
  /// d/(|xi| M) and sqrt(2 d/(sigma M)).
  double theta_gap_predicted{0.0};
  double phi_gap_predicted{0.0};
};

/// Exact circle-tangent geometry for the cell kappa = xi' - M xi.
SingularityAngles singularity_angles(const IVec2 &xi, std::int64_t M, double sigma);

struct VolumeCheck {
  double alpha{0.0};
  double z{0.0};
  /// theta + alpha + phi - pi/2 as evaluated.
  double angle_identity{0.0};
  double lhs{0.0};
  double rhs{0.0};
  double discrepancy{0.0};  // |lhs/rhs - 1|
};

/// Forward-difference Jacobian of the corridor chart (theta, phi) -> (alpha, z)
/// compared with the density identity. theta and phi are measured in the
/// corridor frame: theta from the wall tangency point, positive towards xi.
/// Throws ChartViolation unless the next collision lands on the opposite wall.
VolumeCheck volume_form_check(double theta, double phi, const IVec2 &xi, double sigma, double h);

/// Phase point on O_0 for corridor-frame chart coordinates.
PhasePoint chart_to_phase(double theta, double phi, const IVec2 &xi, double sigma);

/// Inverse of chart_to_phase: corridor-frame (theta, phi) of a phase point.
std::pair<double, double> chart_from_phase(const PhasePoint &p, const IVec2 &xi);

struct LpNormEstimate {
  double p{1.0};
  double estimate{0.0};
  double se{0.0};
  /// estimate * sigma * (p (2 - p))^(1/p)
  double fitted_constant{0.0};
  std::uint64_t samples{0};
};

/// |kappa|^p for `samples` mu-draws, for later reduction.
std::vector<double> kappa_power_samples(double p, double sigma, std::uint64_t samples,
                                        RandomStream &rng);

/// (mean |kappa|^p)^(1/p) with a bootstrap standard error over `resamples`.
LpNormEstimate lp_norm_from_samples(double p, double sigma, const std::vector<double> &values,
                                    RandomStream &bootstrap_rng, int resamples = 200);

LpNormEstimate kappa_lp_norm_mc(double p, double sigma, std::uint64_t samples,
                                RandomStream &rng);

/// Exceedance counts of |kappa| > H for each H, from one pass of mu-draws.
std::vector<CountEstimate> tail_counts(const std::vector<double> &H, double sigma,
                                       std::uint64_t samples, RandomStream &rng);

CountEstimate tail_prob(double H, double sigma, std::uint64_t samples, RandomStream &rng);

/// Leading-order sum of cell measures over every corridor pair and N with
/// |xi' + N xi| > H, truncated at N_max.
double tail_leading(double H, double sigma, std::int64_t n_max);

/// Sufficient statistics of 1 - cos(t.kappa) and -sin(t.kappa).
struct IncrementMoments {
  stats::Moments real;
  stats::Moments imag;
};

IncrementMoments char_increment_moments(const Vec2 &t, double sigma, std::uint64_t samples,
                                        RandomStream &rng);

struct CharIncrement {
  double real{0.0};
  double real_se{0.0};
  double imag{0.0};
  double imag_se{0.0};
  double abar{0.0};
  double prediction_4pi{0.0};  // abar log(1/|t|) / (4 pi sigma)
  double prediction_8pi{0.0};  // abar log(1/|t|) / (8 pi sigma)
  double ratio_4pi{0.0};
  double ratio_8pi{0.0};
};

CharIncrement char_increment_report(const Vec2 &t, double sigma, const IncrementMoments &m);
CharIncrement char_increment(const Vec2 &t, double sigma, std::uint64_t samples,
                             RandomStream &rng);

}  // namespace lorentz
