#pragma once

// Exact finite-state computations for small lattices. Every configuration of
// the n-1 sites is enumerated (state index bit x-1 = occupation of site x) and
// the accelerated generator n^2 L is stored row-wise.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "slowsep/lattice.hpp"

namespace slowsep::exact {

/// Largest lattice scale accepted by build_generator (2^13 states).
inline constexpr int kMaxLatticeSize = 14;

/// Probability vector over the 2^(n-1) states.
using StateDistribution = std::vector<double>;

struct Transition {
  std::uint32_t target;
  double rate;
};

class GeneratorMatrix {
 public:
  std::size_t dimension() const noexcept { return diagonal_.size(); }
  int lattice_size() const noexcept { return n_; }

  std::span<const Transition> row(std::size_t state) const noexcept {
    return {entries_.data() + offsets_[state], entries_.data() + offsets_[state + 1]};
  }
  double diagonal(std::size_t state) const noexcept { return diagonal_[state]; }

  double max_exit_rate() const noexcept;
  /// max over rows of |sum of row|.
  double max_row_sum_residual() const noexcept;

  /// mu Q (row vector times matrix).
  std::vector<double> left_multiply(std::span<const double> mu) const;
  /// Q f (matrix times column vector).
  std::vector<double> apply(std::span<const double> f) const;

 private:
  friend GeneratorMatrix build_generator(const Parameters& p);

  int n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> entries_;
  std::vector<double> diagonal_;
};

/// Accelerated generator n^2 L for p. No-op swaps contribute no entries; bonds
/// leading to the same target (n = 2) share one entry.
/// Throws std::invalid_argument when n exceeds kMaxLatticeSize.
GeneratorMatrix build_generator(const Parameters& p);

/// Unique pi with pi Q = 0, sum(pi) = 1, by dense LU on Q^T with one row
/// replaced by the normalisation constraint.
StateDistribution stationary_distribution(const GeneratorMatrix& q);

/// ||mu Q||_inf.
double stationarity_residual(const GeneratorMatrix& q, std::span<const double> mu);

/// Product Bernoulli(rho) law on n-1 sites.
StateDistribution product_measure(int n, double rho);

/// Dirac mass at eta.
StateDistribution point_mass(const Configuration& eta);

/// E_mu[eta(x)] for x = 1..n-1.
std::vector<double> mean_occupation(std::span<const double> mu, int n);

/// Stationary mean profile rho^n(x), x = 1..n-1.
std::vector<double> exact_mean_profile(const GeneratorMatrix& q, const Parameters& p);

/// Max residual of the three stationary recurrence relations.
double recurrence_residual(std::span<const double> profile, const Parameters& p);

/// a_n x + b_n for x = 1..n-1, with a_n = (beta-alpha)/(2n^theta + n - 2)
/// and b_n = alpha + a_n (n^theta - 1).
std::vector<double> closed_form_profile(const Parameters& p);

/// mu0 exp(tQ) by uniformization. The horizon is split so that each chunk
/// has Poisson mean at most 16; per-chunk truncation mass is below 1e-15.
StateDistribution exact_evolution(const GeneratorMatrix& q, std::span<const double> mu0, double t);

/// Sum over bonds of E_mu[r_{x,x+1} (f(sigma eta) - f(eta))^2], un-accelerated rates.
double dirichlet_form(std::span<const double> f, std::span<const double> mu, const Parameters& p);

/// <-L f, f>_mu with the un-accelerated generator L = Q / n^2.
double generator_form(const GeneratorMatrix& q, std::span<const double> f,
                      std::span<const double> mu);

/// E_mu[ sum_{eta'} Q(eta, eta') (g(eta') - g(eta))^2 ], the expected carre du champ.
double carre_du_champ(const GeneratorMatrix& q, std::span<const double> g,
                      std::span<const double> mu);

/// max |r(eta) nu(eta) - r(sigma eta) nu(sigma eta)| over states and bonds
/// for nu = product Bernoulli(rho). Throws std::domain_error unless alpha = beta = rho.
double detailed_balance_check(const Parameters& p);

/// exp(tA) v, where A is the symmetric tridiagonal matrix of the closed linear
/// system obeyed by the mean occupations when both reservoir densities are 0:
/// d/dt E[eta(x)] = n^2 (discrete Laplacian) with reservoir damping n^-theta
/// at sites 1 and n-1. Valid for any n (no state enumeration).
std::vector<double> mean_relaxation(const Parameters& p, std::span<const double> v, double t);

/// Exact mean profile at time t from initial mean profile rho0:
/// rho_ss + exp(tA)(rho0 - rho_ss), rho_ss the closed-form stationary profile.
std::vector<double> mean_profile_evolution(const Parameters& p, std::span<const double> rho0, double t);

/// Tabulates a configuration function over all states.
std::vector<double> tabulate(int n, const std::function<double(const Configuration&)>& f);

/// Sparse triplet dump: one "row col value" line per nonzero, diagonal included.
void write_triplets(const GeneratorMatrix& q, std::ostream& out);
/// One "state probability" line per state.
void write_distribution(std::span<const double> mu, std::ostream& out);

}  // namespace slowsep::exact
