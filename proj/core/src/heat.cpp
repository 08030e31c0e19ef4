#include "slowsep/heat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slowsep::pde {

namespace {

// Tridiagonal operator A with constant source c on the unknowns: drho/dt = A rho + c.
struct Tridiagonal {
  std::vector<double> lower, diag, upper, source;
};

Tridiagonal build_operator(Regime regime, int M, double alpha, double beta) {
  const double h = 1.0 / M;
  const double ih2 = 1.0 / (h * h);
  Tridiagonal a;
  if (regime == Regime::Dirichlet) {
    const std::size_t m = static_cast<std::size_t>(M - 1);
    a.lower.assign(m, ih2);
    a.diag.assign(m, -2.0 * ih2);
    a.upper.assign(m, ih2);
    a.source.assign(m, 0.0);
    a.source.front() += alpha * ih2;
    a.source.back() += beta * ih2;
    a.lower.front() = 0.0;
    a.upper.back() = 0.0;
    return a;
  }
  const std::size_t m = static_cast<std::size_t>(M + 1);
  a.lower.assign(m, ih2);
  a.diag.assign(m, -2.0 * ih2);
  a.upper.assign(m, ih2);
  a.source.assign(m, 0.0);
  a.lower.front() = 0.0;
  a.upper.back() = 0.0;
  // Ghost nodes: rho_{-1} = rho_1 - 2h(rho_0 - alpha), rho_{M+1} = rho_{M-1} + 2h(beta - rho_M).
  a.upper.front() = 2.0 * ih2;
  a.lower.back() = 2.0 * ih2;
  if (regime == Regime::Robin) {
    a.diag.front() = -(2.0 + 2.0 * h) * ih2;
    a.diag.back() = -(2.0 + 2.0 * h) * ih2;
    a.source.front() = 2.0 * alpha / h;
    a.source.back() = 2.0 * beta / h;
  }
  return a;
}

// One theta-scheme step: (I - w k A) x' = (I + (1-w) k A) x + k c.
void step(const Tridiagonal& a, std::vector<double>& x, double k, double w, std::vector<double>& rhs,
          std::vector<double>& cprime) {
  const std::size_t m = x.size();
  const double e = (1.0 - w) * k;
  for (std::size_t j = 0; j < m; ++j) {
    double ax = a.diag[j] * x[j];
    if (j > 0) ax += a.lower[j] * x[j - 1];
    if (j + 1 < m) ax += a.upper[j] * x[j + 1];
    rhs[j] = x[j] + e * ax + k * a.source[j];
  }
  // Thomas algorithm on the implicit matrix.
  const double s = w * k;
  double b0 = 1.0 - s * a.diag[0];
  cprime[0] = -s * a.upper[0] / b0;
  rhs[0] /= b0;
  for (std::size_t j = 1; j < m; ++j) {
    const double l = -s * a.lower[j];
    const double denom = 1.0 - s * a.diag[j] - l * cprime[j - 1];
    cprime[j] = j + 1 < m ? -s * a.upper[j] / denom : 0.0;
    rhs[j] = (rhs[j] - l * rhs[j - 1]) / denom;
  }
  x[m - 1] = rhs[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) x[j] = rhs[j] - cprime[j] * x[j + 1];
}

}  // namespace

double DensityField::at(std::size_t k, double u) const {
  const auto& v = values.at(k);
  if (u <= 0.0) return v.front();
  if (u >= 1.0) return v.back();
  const double pos = u * static_cast<double>(grid.size() - 1);
  const auto j = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double frac = pos - static_cast<double>(j);
  return (1.0 - frac) * v[j] + frac * v[j + 1];
}

double DensityField::min_value() const {
  double m = INFINITY;
  for (const auto& row : values) m = std::min(m, *std::min_element(row.begin(), row.end()));
  return m;
}

double DensityField::max_value() const {
  double m = -INFINITY;
  for (const auto& row : values) m = std::max(m, *std::max_element(row.begin(), row.end()));
  return m;
}

DensityField solve_heat(Regime regime, const std::function<double(double)>& rho0, double alpha,
                        double beta, const HeatOptions& options) {
  const int M = options.points;
  if (M < 2) throw std::invalid_argument("solve_heat: need M >= 2");
  if (!(options.dt > 0.0)) throw std::invalid_argument("solve_heat: dt must be positive");
  if (!(options.horizon >= 0.0) || !std::isfinite(options.horizon)) {
    throw std::invalid_argument("solve_heat: horizon must be finite and >= 0");
  }
  std::vector<double> times = options.times;
  if (times.empty()) times = {0.0, options.horizon};
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || times[k] > options.horizon) {
      throw std::invalid_argument("solve_heat: output time outside [0, horizon]");
    }
    if (k > 0 && times[k] < times[k - 1]) throw std::invalid_argument("solve_heat: output times must be sorted");
  }

  DensityField field;
  field.grid.resize(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) field.grid[static_cast<std::size_t>(j)] = static_cast<double>(j) / M;
  field.times = times;

  const bool dirichlet = regime == Regime::Dirichlet;
  const Tridiagonal a = build_operator(regime, M, alpha, beta);
  std::vector<double> x;
  if (dirichlet) {
    for (int j = 1; j < M; ++j) x.push_back(rho0(field.grid[static_cast<std::size_t>(j)]));
  } else {
    for (double u : field.grid) x.push_back(rho0(u));
  }
  std::vector<double> rhs(x.size()), cprime(x.size());

  auto emit = [&](bool initial) {
    if (!dirichlet) {
      field.values.push_back(x);
      return;
    }
    std::vector<double> row(field.grid.size());
    row.front() = initial ? rho0(0.0) : alpha;
    row.back() = initial ? rho0(1.0) : beta;
    std::copy(x.begin(), x.end(), row.begin() + 1);
    field.values.push_back(std::move(row));
  };

  double now = 0.0;
  bool started = false;
  for (double target : times) {
    const double span = target - now;
    if (span > 0.0) {
      const auto steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / options.dt - 1e-9)));
      const double k = span / static_cast<double>(steps);
      for (long long s = 0; s < steps; ++s) {
        if (!started) {
          for (int q = 0; q < 4; ++q) step(a, x, 0.25 * k, 1.0, rhs, cprime);
          started = true;
        } else {
          step(a, x, k, 0.5, rhs, cprime);
        }
      }
      now = target;
    }
    emit(!started);
  }
  return field;
}

AffineProfile hydrostatic_profile(double theta, double alpha, double beta) {
  if (theta < 1.0) return {beta - alpha, alpha};
  if (theta == 1.0) return {(beta - alpha) / 3.0, alpha + (beta - alpha) / 3.0};
  return {0.0, 0.5 * (alpha + beta)};
}

double trapezoid(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("trapezoid: need at least two samples");
  const double h = 1.0 / static_cast<double>(samples.size() - 1);
  double sum = 0.5 * (samples.front() + samples.back());
  for (std::size_t j = 1; j + 1 < samples.size(); ++j) sum += samples[j];
  return sum * h;
}

}  // namespace slowsep::pde
