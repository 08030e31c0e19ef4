#pragma once

#include <cstddef>
#include <span>

namespace slowsep::stats {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  /// Unbiased sample variance.
  double variance = 0.0;
  /// Standard error of the mean.
  double std_error = 0.0;
};

/// Two-pass summary in index order. Throws std::invalid_argument when empty.
Summary summarize(std::span<const double> xs);

/// (estimate - theory) / std_error; 0 when both coincide exactly, +-inf when
/// the error is zero but they differ.
double z_score(double estimate, double theory, double std_error);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

/// Weighted least squares y = a + b x with per-point standard deviations
/// sigma (all ones when empty). Needs at least two points.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma = {});

}  // namespace slowsep::stats
