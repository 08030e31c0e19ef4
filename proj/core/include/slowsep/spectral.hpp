#pragma once

// Eigenbases of the Laplacian on [0, 1] for the three boundary regimes and
// the heat semigroup built on them.

#include <cstddef>
#include <span>
#include <vector>

#include "slowsep/lattice.hpp"
#include "slowsep/test_function.hpp"

namespace slowsep::pde {

struct Mode {
  int index;
  double eigenvalue;
  /// Dirichlet/Neumann: sqrt(2) (1 for the constant mode). Robin: A_k.
  double normalizer;
};

class SpectralBasis {
 public:
  SpectralBasis(Regime regime, std::vector<Mode> modes);

  Regime regime() const noexcept { return regime_; }
  std::span<const Mode> modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return modes_.size(); }
  const Mode& mode(std::size_t i) const { return modes_.at(i); }

  /// Psi_i(u) and its first two derivatives, i indexing modes().
  double value(std::size_t i, double u) const;
  double derivative(std::size_t i, double u) const;
  double second_derivative(std::size_t i, double u) const;

 private:
  Regime regime_;
  std::vector<Mode> modes_;
};

/// Dirichlet: k = 1..K. Neumann: k = 0..K. Robin: k = 0..K, the (k+1)-th
/// positive root of 2 s cos s + (1 - s^2) sin s = 0 with lambda = s^2,
/// bracketed in (k pi, (k+1) pi) and bisected to 1e-12 relative, so that
/// lambda_k ~ k^2 pi^2 as in the other regimes.
/// Throws std::runtime_error when a bracket has no sign change.
SpectralBasis eigenbasis(Regime regime, int K);

/// Robin eigenvalue lambda_k, k >= 0 (lambda_0 ~ 1.707).
double robin_eigenvalue(int k);

/// A_k such that A_k (sin(s u) + s cos(s u)) has unit L2 norm, s = sqrt(lambda).
double robin_normalizer(double lambda);

struct SemigroupResult {
  std::vector<double> grid;
  std::vector<double> values;
  int modes_used = 0;
  /// Modes of the truncated expansion and the coefficients of T_t f in them.
  std::vector<Mode> modes;
  std::vector<double> coefficients;
  /// L2 distance between the input and its truncated expansion (t = 0 only).
  double projection_error = 0.0;
};

/// T_t f on the uniform grid with M+1 points. For t > 0 the expansion is
/// truncated once exp(-lambda_K t) ||f|| < 1e-10 (the basis is extended when
/// needed); for t = 0 every mode of `basis` is used. Fourier coefficients use
/// composite trapezoid, refined by doubling until they move less than 1e-10.
SemigroupResult semigroup_apply(const SpectralBasis& basis, const TestFunction& f, double t,
                                int M = 400);

/// The function u -> sum_i coefficients[i] Psi_i(u) over the given modes.
TestFunction series_function(Regime regime, std::vector<Mode> modes, std::vector<double> coefficients);

/// Same for a profile sampled on a uniform grid of profile.size() points.
SemigroupResult semigroup_apply(const SpectralBasis& basis, std::span<const double> profile,
                                double t);

}  // namespace slowsep::pde
