#include "slowsep/lattice.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "slowsep/random.hpp"

namespace slowsep {

Regime regime_for(double theta) noexcept {
  if (theta < 1.0) return Regime::Dirichlet;
  if (theta == 1.0) return Regime::Robin;
  return Regime::Neumann;
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Dirichlet: return "dirichlet";
    case Regime::Robin: return "robin";
    case Regime::Neumann: return "neumann";
  }
  return "unknown";
}

namespace {

bool open_unit(double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; }

}  // namespace

Parameters make_parameters(int n, double theta, double alpha, double beta, double rho) {
  if (n < 2) {
    throw std::invalid_argument("lattice too small: n = " + std::to_string(n) + " (need n >= 2)");
  }
  if (!std::isfinite(theta) || theta < 0.0) {
    throw std::invalid_argument("theta must be a finite value >= 0, got " + std::to_string(theta));
  }
  if (!open_unit(alpha) || !open_unit(beta) || !open_unit(rho)) {
    throw std::invalid_argument("density out of range: alpha, beta and rho must lie in (0, 1)");
  }
  Parameters p;
  p.n_ = n;
  p.theta_ = theta;
  p.alpha_ = alpha;
  p.beta_ = beta;
  p.rho_ = rho;
  p.regime_ = regime_for(theta);
  p.boundary_scale_ = std::pow(static_cast<double>(n), -theta);
  return p;
}

Parameters make_equilibrium_parameters(int n, double theta, double rho) {
  return make_parameters(n, theta, rho, rho, rho);
}

Configuration::Configuration(std::size_t sites) : sites_(sites), words_((sites + 63) / 64, 0) {}

Configuration::Configuration(std::initializer_list<int> occupations)
    : Configuration(occupations.size()) {
  std::size_t x = 1;
  for (int v : occupations) set(x++, v != 0);
}

Configuration Configuration::from_occupations(std::span<const int> occupations) {
  Configuration eta(occupations.size());
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    if (occupations[i] != 0 && occupations[i] != 1) {
      throw std::invalid_argument("occupation values must be 0 or 1");
    }
    eta.set(i + 1, occupations[i] != 0);
  }
  return eta;
}

Configuration Configuration::from_index(std::uint64_t code, std::size_t sites) {
  if (sites > 64) throw std::invalid_argument("from_index supports at most 64 sites");
  Configuration eta(sites);
  if (sites > 0) {
    eta.words_[0] = sites == 64 ? code : code & ((std::uint64_t{1} << sites) - 1);
  }
  return eta;
}

std::size_t Configuration::particle_count() const noexcept {
  std::size_t count = 0;
  for (auto w : words_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

std::uint64_t Configuration::to_index() const {
  if (sites_ > 64) throw std::logic_error("to_index supports at most 64 sites");
  return words_.empty() ? 0 : words_[0];
}

std::vector<int> Configuration::occupations() const {
  std::vector<int> out(sites_);
  for (std::size_t x = 1; x <= sites_; ++x) out[x - 1] = at(x);
  return out;
}

double boundary_rate(const Parameters& p, const Configuration& eta, int bond) noexcept {
  const bool left = bond == 0;
  const double density = left ? p.alpha() : p.beta();
  const bool occ = eta.occupied(left ? 1 : static_cast<std::size_t>(p.n() - 1));
  return p.boundary_scale() * (occ ? 1.0 - density : density);
}

std::vector<double> jump_rates(const Parameters& p, const Configuration& eta) {
  if (eta.sites() != static_cast<std::size_t>(p.sites())) {
    throw std::invalid_argument("configuration length " + std::to_string(eta.sites()) +
                                " does not match n - 1 = " + std::to_string(p.sites()));
  }
  std::vector<double> rates(static_cast<std::size_t>(p.bonds()), 1.0);
  rates.front() = boundary_rate(p, eta, 0);
  rates.back() = boundary_rate(p, eta, p.n() - 1);
  return rates;
}

void apply_event_in_place(Configuration& eta, BondEvent e) noexcept {
  const auto last = static_cast<int>(eta.sites());
  if (e.bond == 0) {
    eta.flip(1);
  } else if (e.bond == last) {
    eta.flip(eta.sites());
  } else {
    const auto x = static_cast<std::size_t>(e.bond);
    const bool a = eta.occupied(x);
    const bool b = eta.occupied(x + 1);
    if (a != b) {
      eta.set(x, b);
      eta.set(x + 1, a);
    }
  }
}

Configuration apply_event(Configuration eta, BondEvent e) {
  if (eta.sites() == 0 || e.bond < 0 || e.bond > static_cast<int>(eta.sites())) {
    throw std::out_of_range("bond " + std::to_string(e.bond) + " outside [0, " +
                            std::to_string(eta.sites()) + "]");
  }
  apply_event_in_place(eta, e);
  return eta;
}

Configuration bernoulli_sample(const Parameters& p, double rho, RandomStream& rng) {
  if (!open_unit(rho)) throw std::invalid_argument("rho must lie in (0, 1)");
  Configuration eta(static_cast<std::size_t>(p.sites()));
  for (std::size_t x = 1; x <= eta.sites(); ++x) eta.set(x, rng.bernoulli(rho));
  return eta;
}

Configuration product_sample(std::span<const double> density, RandomStream& rng) {
  Configuration eta(density.size());
  for (std::size_t x = 1; x <= density.size(); ++x) {
    const double d = density[x - 1];
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("site density outside [0, 1]");
    eta.set(x, rng.bernoulli(d));
  }
  return eta;
}

}  // namespace slowsep
