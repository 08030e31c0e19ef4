#pragma once

// Lattice primitives for the exclusion process with slow reservoirs:
// parameters, occupation configurations, bond events and jump rates.
//
// Sites are numbered 1..n-1. Bonds are numbered 0..n-1; bond x joins sites
// x and x+1, with bond 0 and bond n-1 standing for the left and right
// reservoir couplings (they flip the occupation of site 1 and site n-1).

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace slowsep {

class RandomStream;

/// Macroscopic boundary condition selected by the slowness exponent.
enum class Regime { Dirichlet, Robin, Neumann };

Regime regime_for(double theta) noexcept;
std::string_view to_string(Regime regime) noexcept;

class Parameters {
 public:
  /// n = 2, theta = 0 and all densities 1/2.
  Parameters() = default;

  int n() const noexcept { return n_; }
  double theta() const noexcept { return theta_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double rho() const noexcept { return rho_; }
  Regime regime() const noexcept { return regime_; }

  int sites() const noexcept { return n_ - 1; }
  int bonds() const noexcept { return n_; }

  /// n^-theta, the damping applied to both reservoir couplings.
  double boundary_scale() const noexcept { return boundary_scale_; }

  /// Diffusive time acceleration n^2.
  double acceleration() const noexcept { return static_cast<double>(n_) * n_; }

  /// rho(1 - rho).
  double chi() const noexcept { return rho_ * (1.0 - rho_); }

  /// True when both reservoirs sit at the equilibrium density rho.
  bool at_equilibrium() const noexcept { return alpha_ == rho_ && beta_ == rho_; }

  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  friend Parameters make_parameters(int, double, double, double, double);

  int n_ = 2;
  double theta_ = 0.0;
  double alpha_ = 0.5;
  double beta_ = 0.5;
  double rho_ = 0.5;
  Regime regime_ = Regime::Dirichlet;
  double boundary_scale_ = 1.0;
};

/// Validates and builds a parameter set. Throws std::invalid_argument when
/// n < 2, theta < 0 (or not finite), or a density lies outside (0, 1).
Parameters make_parameters(int n, double theta, double alpha, double beta, double rho);

/// Equilibrium parameters alpha = beta = rho.
Parameters make_equilibrium_parameters(int n, double theta, double rho);

/// Occupation variables over sites 1..n-1, stored as packed bits.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t sites);
  Configuration(std::initializer_list<int> occupations);

  static Configuration from_occupations(std::span<const int> occupations);
  /// Bit x-1 of `code` is the occupation of site x. Requires sites <= 64.
  static Configuration from_index(std::uint64_t code, std::size_t sites);

  std::size_t sites() const noexcept { return sites_; }

  /// Occupation of site x (1-based).
  bool occupied(std::size_t x) const noexcept {
    const std::size_t i = x - 1;
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  int at(std::size_t x) const noexcept { return occupied(x) ? 1 : 0; }

  void set(std::size_t x, bool value) noexcept {
    const std::size_t i = x - 1;
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }
  void flip(std::size_t x) noexcept {
    const std::size_t i = x - 1;
    words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
  }

  std::size_t particle_count() const noexcept;
  std::uint64_t to_index() const;
  std::vector<int> occupations() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::size_t sites_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BondEvent {
  int bond = 0;
  friend bool operator==(const BondEvent&, const BondEvent&) = default;
};

/// Un-accelerated rates r_{x,x+1}(eta) for bonds 0..n-1. Bulk bonds always
/// carry rate 1, including swaps of equal occupations.
std::vector<double> jump_rates(const Parameters& p, const Configuration& eta);

/// Rate of reservoir bond 0 or n-1 in configuration eta.
double boundary_rate(const Parameters& p, const Configuration& eta, int bond) noexcept;

/// Swap across a bulk bond or flip at a reservoir bond.
Configuration apply_event(Configuration eta, BondEvent e);

/// In-place variant used by the event loop. Bond must already be validated.
void apply_event_in_place(Configuration& eta, BondEvent e) noexcept;

/// Product Bernoulli(rho) configuration on n-1 sites.
Configuration bernoulli_sample(const Parameters& p, double rho, RandomStream& rng);

/// Product measure with site-dependent densities, density(x-1) for site x.
Configuration product_sample(std::span<const double> density, RandomStream& rng);

}  // namespace slowsep
