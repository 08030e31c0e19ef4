#pragma once

#include <functional>
#include <span>
#include <vector>

#include "slowsep/lattice.hpp"

namespace slowsep::pde {

struct HeatOptions {
  int points = 400;     // M: the grid has M+1 nodes
  double dt = 1e-3;
  double horizon = 1.0;
  /// Output times in [0, horizon]; {0, horizon} when empty.
  std::vector<double> times;
};

struct DensityField {
  std::vector<double> grid;
  std::vector<double> times;
  /// values[k][j] = rho(times[k], grid[j])
  std::vector<std::vector<double>> values;

  /// Linear interpolation in space at output index k.
  double at(std::size_t k, double u) const;
  double min_value() const;
  double max_value() const;
};

/// Crank-Nicolson on a uniform grid. Dirichlet pins rho(t,0) = alpha and
/// rho(t,1) = beta; Robin (d_u rho(0) = rho(0) - alpha, d_u rho(1) = beta - rho(1))
/// and Neumann use second-order ghost nodes. The first step is replaced by
/// four backward-Euler quarter steps to damp rough initial data.
/// Throws std::invalid_argument for M < 2, dt <= 0, a bad horizon or output times.
DensityField solve_heat(Regime regime, const std::function<double(double)>& rho0, double alpha,
                        double beta, const HeatOptions& options);

/// Stationary profile u -> slope u + intercept.
struct AffineProfile {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double u) const noexcept { return slope * u + intercept; }
};

AffineProfile hydrostatic_profile(double theta, double alpha, double beta);

/// Composite trapezoid integral of samples on a uniform grid over [0, 1].
double trapezoid(std::span<const double> samples);

}  // namespace slowsep::pde
