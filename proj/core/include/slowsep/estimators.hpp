#pragma once

// Replica-level estimators for the fluctuation experiments. All estimators
// are folds over replica data in index order.

#include <span>
#include <vector>

#include "slowsep/fluctuation.hpp"
#include "slowsep/simulator.hpp"
#include "slowsep/stats.hpp"

namespace slowsep::fluct {

using stats::Estimate;

/// Unbiased sample variance with the fourth-moment standard error.
Estimate sample_variance(std::span<const double> x);

/// Sample covariance of paired samples with a jackknife standard error.
/// Throws std::invalid_argument for fewer than 2 pairs or mismatched lengths.
Estimate sample_covariance(std::span<const double> x, std::span<const double> y);

/// Cov(Y_s, Y_t) across the replicas of a series.
Estimate covariance_estimator(const FluctuationSeries& series, double s, double t);

struct CharacteristicCheck {
  double lambda = 0.0;
  /// Sample mean of cos(lambda Y) and its standard error.
  Estimate real_part;
  /// Sample mean of sin(lambda Y) and its standard error.
  Estimate imaginary_part;
  /// exp(-lambda^2 sigma^2 / 2) with sigma^2 = chi int f^2.
  double theory = 0.0;
  double z = 0.0;
};

struct GaussianityReport {
  std::size_t replicas = 0;
  Estimate mean;
  Estimate variance;
  /// chi (1/n) sum_x f(x/n)^2, the exact variance under the product measure.
  double lattice_variance = 0.0;
  /// chi int f^2, the variance of the limiting Gaussian field.
  double limit_variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double jarque_bera = 0.0;
  /// Chi-square(2) survival of the Jarque-Bera statistic.
  double p_value = 1.0;
  std::vector<CharacteristicCheck> characteristic;
};

inline constexpr std::size_t kMinGaussianityReplicas = 1000;

/// Moments, normality statistic and characteristic-function checks of the
/// time-zero field values. Throws std::invalid_argument below 1000 replicas.
GaussianityReport initial_gaussianity(const FluctuationSeries& series, const pde::TestFunction& f,
                                      std::span<const double> lambdas = std::vector<double>{0.5, 1.0, 2.0});

/// Same, from raw time-zero values.
GaussianityReport initial_gaussianity(std::span<const double> y0, const pde::TestFunction& f,
                                      const Parameters& p, double rho,
                                      std::span<const double> lambdas = std::vector<double>{0.5, 1.0, 2.0});

/// E[(c_n int_0^t (eta_s(x) - rho) ds)^2] over event-logged records. x must be
/// 1 or n-1.
Estimate replacement_moment(std::span<const kmc::TrajectoryRecord> records, int x, double c_n,
                            double t);

/// Same, from precomputed integrals int_0^t (eta_s(x) - rho) ds.
Estimate replacement_moment(std::span<const double> integrals, double c_n);

/// Least-squares slope of log(value) against log(n), weighted by the relative errors.
stats::LineFit log_log_slope(std::span<const double> n, std::span<const Estimate> values);

}  // namespace slowsep::fluct
