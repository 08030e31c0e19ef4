#include "slowsep/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "slowsep/heat.hpp"

namespace slowsep::pde {

namespace {

constexpr double kPi = std::numbers::pi;

// Zero set of this function (s > 0) gives the Robin eigenvalues lambda = s^2.
double robin_condition(double s) { return 2.0 * s * std::cos(s) + (1.0 - s * s) * std::sin(s); }

constexpr double kCoefficientTolerance = 1e-10;
constexpr double kTruncationTolerance = 1e-10;

std::vector<double> trapezoid_coefficients(const SpectralBasis& basis, std::span<const double> samples) {
  const std::size_t points = samples.size();
  const double h = 1.0 / static_cast<double>(points - 1);
  std::vector<double> coeffs(basis.size(), 0.0);
  std::vector<double> prod(points);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < points; ++j) {
      prod[j] = samples[j] * basis.value(i, static_cast<double>(j) * h);
    }
    coeffs[i] = trapezoid(prod);
  }
  return coeffs;
}

std::vector<double> sample(const TestFunction& f, std::size_t points) {
  std::vector<double> v(points);
  const double h = 1.0 / static_cast<double>(points - 1);
  for (std::size_t j = 0; j < points; ++j) v[j] = f.value(static_cast<double>(j) * h);
  return v;
}

// Smallest basis covering the truncation rule for time t and norm `norm`.
SpectralBasis truncated_basis(const SpectralBasis& basis, double t, double norm) {
  if (t == 0.0) return basis;
  if (norm == 0.0) return SpectralBasis(basis.regime(), {basis.mode(0)});
  const double lambda_cut = std::log(norm / kTruncationTolerance) / t;
  std::vector<Mode> kept;
  for (const auto& m : basis.modes()) {
    kept.push_back(m);
    if (m.eigenvalue >= lambda_cut) return SpectralBasis(basis.regime(), std::move(kept));
  }
  const int K = static_cast<int>(std::ceil(std::sqrt(std::max(lambda_cut, 0.0)) / kPi)) + 2;
  return truncated_basis(eigenbasis(basis.regime(), std::max(K, 1)), t, norm);
}

SemigroupResult evolve(const SpectralBasis& basis, std::span<const double> coeffs, double t, int M) {
  SemigroupResult out;
  out.grid.resize(static_cast<std::size_t>(M) + 1);
  out.values.assign(out.grid.size(), 0.0);
  for (std::size_t j = 0; j < out.grid.size(); ++j) out.grid[j] = static_cast<double>(j) / M;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double a = coeffs[i] * std::exp(-basis.mode(i).eigenvalue * t);
    if (a == 0.0) continue;
    for (std::size_t j = 0; j < out.grid.size(); ++j) out.values[j] += a * basis.value(i, out.grid[j]);
  }
  out.modes_used = static_cast<int>(basis.size());
  out.modes.assign(basis.modes().begin(), basis.modes().end());
  out.coefficients.resize(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out.coefficients[i] = coeffs[i] * std::exp(-basis.mode(i).eigenvalue * t);
  }
  return out;
}

}  // namespace

SpectralBasis::SpectralBasis(Regime regime, std::vector<Mode> modes)
    : regime_(regime), modes_(std::move(modes)) {}

double SpectralBasis::value(std::size_t i, double u) const {
  const Mode& m = modes_[i];
  switch (regime_) {
    case Regime::Dirichlet:
      return m.normalizer * std::sin(m.index * kPi * u);
    case Regime::Neumann:
      return m.index == 0 ? m.normalizer : m.normalizer * std::cos(m.index * kPi * u);
    case Regime::Robin: {
      const double s = std::sqrt(m.eigenvalue);
      return m.normalizer * (std::sin(s * u) + s * std::cos(s * u));
    }
  }
  return 0.0;
}

double SpectralBasis::derivative(std::size_t i, double u) const {
  const Mode& m = modes_[i];
  switch (regime_) {
    case Regime::Dirichlet:
      return m.normalizer * m.index * kPi * std::cos(m.index * kPi * u);
    case Regime::Neumann:
      return -m.normalizer * m.index * kPi * std::sin(m.index * kPi * u);
    case Regime::Robin: {
      const double s = std::sqrt(m.eigenvalue);
      return m.normalizer * s * (std::cos(s * u) - s * std::sin(s * u));
    }
  }
  return 0.0;
}

double SpectralBasis::second_derivative(std::size_t i, double u) const {
  return -modes_[i].eigenvalue * value(i, u);
}

double robin_eigenvalue(int k) {
  if (k < 0) throw std::invalid_argument("Robin eigenvalues are indexed from k = 0");
  double lo = k * kPi;
  double hi = (k + 1) * kPi;
  if (k == 0) lo = 1e-8;  // s = 0 is a trivial root
  double f_lo = robin_condition(lo);
  const double f_hi = robin_condition(hi);
  if (f_lo * f_hi > 0.0) {
    throw std::runtime_error("Robin root k=" + std::to_string(k) + " not bracketed in [" +
                             std::to_string(lo * lo) + ", " + std::to_string(hi * hi) + "]");
  }
  while (hi - lo > 0.5e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = robin_condition(mid);
    if (f_mid == 0.0) return mid * mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double s = 0.5 * (lo + hi);
  return s * s;
}

double robin_normalizer(double lambda) {
  const double s = std::sqrt(lambda);
  const double sin2 = std::sin(2.0 * s);
  const double sn = std::sin(s);
  // Integral over [0, 1] of (sin(su) + s cos(su))^2.
  const double norm2 = 0.5 - sin2 / (4.0 * s) + sn * sn + s * s * 0.5 + s * sin2 / 4.0;
  return 1.0 / std::sqrt(norm2);
}

SpectralBasis eigenbasis(Regime regime, int K) {
  if (K < 1) throw std::invalid_argument("eigenbasis needs K >= 1");
  std::vector<Mode> modes;
  switch (regime) {
    case Regime::Dirichlet:
      for (int k = 1; k <= K; ++k) modes.push_back({k, k * k * kPi * kPi, std::numbers::sqrt2});
      break;
    case Regime::Neumann:
      modes.push_back({0, 0.0, 1.0});
      for (int k = 1; k <= K; ++k) modes.push_back({k, k * k * kPi * kPi, std::numbers::sqrt2});
      break;
    case Regime::Robin:
      for (int k = 0; k <= K; ++k) {
        const double lambda = robin_eigenvalue(k);
        modes.push_back({k, lambda, robin_normalizer(lambda)});
      }
      break;
  }
  return SpectralBasis(regime, std::move(modes));
}

TestFunction series_function(Regime regime, std::vector<Mode> modes, std::vector<double> coefficients) {
  if (modes.size() != coefficients.size()) throw std::invalid_argument("series_function: length mismatch");
  auto basis = std::make_shared<const SpectralBasis>(regime, std::move(modes));
  auto c = std::make_shared<const std::vector<double>>(std::move(coefficients));
  auto sum = [basis, c](auto member) {
    return [basis, c, member](double u) {
      double s = 0.0;
      for (std::size_t i = 0; i < c->size(); ++i) s += (*c)[i] * ((*basis).*member)(i, u);
      return s;
    };
  };
  return TestFunction{regime, sum(&SpectralBasis::value), sum(&SpectralBasis::derivative),
                      sum(&SpectralBasis::second_derivative), "spectral series"};
}

SemigroupResult semigroup_apply(const SpectralBasis& basis, const TestFunction& f, double t, int M) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be >= 0");
  if (M < 2) throw std::invalid_argument("semigroup_apply: M must be >= 2");

  std::size_t points = std::max<std::size_t>(1025, static_cast<std::size_t>(M) + 1);
  const double norm = std::sqrt(squared_norm(f));
  const SpectralBasis used = truncated_basis(basis, t, norm);

  auto samples = sample(f, points);
  auto coeffs = trapezoid_coefficients(used, samples);
  constexpr std::size_t kMaxPoints = (std::size_t{1} << 22) + 1;
  while (points < kMaxPoints) {
    points = 2 * (points - 1) + 1;
    samples = sample(f, points);
    auto refined = trapezoid_coefficients(used, samples);
    double change = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) change = std::max(change, std::abs(refined[i] - coeffs[i]));
    coeffs = std::move(refined);
    if (change < kCoefficientTolerance) break;
  }

  auto out = evolve(used, coeffs, t, M);
  if (t == 0.0) {
    std::vector<double> diff(out.grid.size());
    for (std::size_t j = 0; j < diff.size(); ++j) {
      const double d = f.value(out.grid[j]) - out.values[j];
      diff[j] = d * d;
    }
    out.projection_error = std::sqrt(trapezoid(diff));
  }
  return out;
}

SemigroupResult semigroup_apply(const SpectralBasis& basis, std::span<const double> profile, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: t must be >= 0");
  if (profile.size() < 3) throw std::invalid_argument("semigroup_apply: profile needs >= 3 points");
  std::vector<double> sq(profile.size());
  for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = profile[j] * profile[j];
  const double norm = std::sqrt(trapezoid(sq));
  const SpectralBasis used = truncated_basis(basis, t, norm);
  const auto coeffs = trapezoid_coefficients(used, profile);
  const int M = static_cast<int>(profile.size()) - 1;
  auto out = evolve(used, coeffs, t, M);
  if (t == 0.0) {
    for (std::size_t j = 0; j < sq.size(); ++j) {
      const double d = profile[j] - out.values[j];
      sq[j] = d * d;
    }
    out.projection_error = std::sqrt(trapezoid(sq));
  }
  return out;
}

}  // namespace slowsep::pde
