#include "slowsep/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slowsep::fluct {

Estimate sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least 2 replicas");
  const auto s = stats::summarize(x);
  const double dn = static_cast<double>(x.size());
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = (v - s.mean) * (v - s.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= dn;
  m4 /= dn;
  return {s.variance, std::sqrt(std::max(0.0, (m4 - (dn - 3.0) / (dn - 1.0) * m2 * m2) / dn))};
}

Estimate sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("covariance: sample lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("covariance needs at least 2 replicas");
  const auto mx = stats::summarize(x).mean;
  const auto my = stats::summarize(y).mean;
  // Centered sums keep the leave-one-out formula well conditioned.
  double sx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i] - mx, b = y[i] - my;
    sx += a;
    sy += b;
    sxy += a * b;
  }
  const double dn = static_cast<double>(n);
  Estimate out;
  out.value = (sxy - sx * sy / dn) / (dn - 1.0);
  if (n < 3) {
    out.std_error = INFINITY;
    return out;
  }
  std::vector<double> loo(n);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i] - mx, b = y[i] - my;
    loo[i] = (sxy - a * b - (sx - a) * (sy - b) / (dn - 1.0)) / (dn - 2.0);
    mean_loo += loo[i];
  }
  mean_loo /= dn;
  double ss = 0.0;
  for (double c : loo) ss += (c - mean_loo) * (c - mean_loo);
  out.std_error = std::sqrt((dn - 1.0) / dn * ss);
  return out;
}

Estimate covariance_estimator(const FluctuationSeries& series, double s, double t) {
  const auto a = series.column(series.time_index(s));
  const auto b = series.column(series.time_index(t));
  return sample_covariance(a, b);
}

GaussianityReport initial_gaussianity(const FluctuationSeries& series, const pde::TestFunction& f,
                                      std::span<const double> lambdas) {
  if (series.times.empty() || series.times.front() != 0.0) {
    throw std::invalid_argument("series has no time-zero values");
  }
  return initial_gaussianity(series.column(0), f, series.params, series.rho, lambdas);
}

GaussianityReport initial_gaussianity(std::span<const double> y0, const pde::TestFunction& f,
                                      const Parameters& p, double rho,
                                      std::span<const double> lambdas) {
  if (y0.size() < kMinGaussianityReplicas) {
    throw std::invalid_argument("initial_gaussianity needs at least " +
                                std::to_string(kMinGaussianityReplicas) + " replicas, got " +
                                std::to_string(y0.size()));
  }
  GaussianityReport r;
  r.replicas = y0.size();
  const double dn = static_cast<double>(y0.size());
  const double chi = rho * (1.0 - rho);

  const auto s = stats::summarize(y0);
  r.mean = {s.mean, s.std_error};
  r.variance = sample_variance(y0);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : y0) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;

  double lattice = 0.0;
  for (int x = 1; x < p.n(); ++x) {
    const double v = f.value(static_cast<double>(x) / p.n());
    lattice += v * v;
  }
  r.lattice_variance = chi * lattice / p.n();
  r.limit_variance = chi * pde::squared_norm(f);

  if (m2 > 0.0) {
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    r.jarque_bera = dn / 6.0 * (r.skewness * r.skewness + 0.25 * r.excess_kurtosis * r.excess_kurtosis);
    r.p_value = std::exp(-0.5 * r.jarque_bera);
  }

  for (double lambda : lambdas) {
    std::vector<double> c(y0.size()), sn(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) {
      c[i] = std::cos(lambda * y0[i]);
      sn[i] = std::sin(lambda * y0[i]);
    }
    const auto cs = stats::summarize(c);
    const auto ss = stats::summarize(sn);
    CharacteristicCheck check;
    check.lambda = lambda;
    check.real_part = {cs.mean, cs.std_error};
    check.imaginary_part = {ss.mean, ss.std_error};
    check.theory = std::exp(-0.5 * lambda * lambda * r.limit_variance);
    check.z = stats::z_score(cs.mean, check.theory, cs.std_error);
    r.characteristic.push_back(check);
  }
  return r;
}

Estimate replacement_moment(std::span<const kmc::TrajectoryRecord> records, int x, double c_n,
                            double t) {
  if (records.empty()) throw std::invalid_argument("replacement_moment: empty record set");
  const int n = records.front().params.n();
  if (x != 1 && x != n - 1) throw std::invalid_argument("replacement_moment: x must be a boundary site");
  std::vector<double> integrals;
  integrals.reserve(records.size());
  for (const auto& rec : records) {
    integrals.push_back(occupation_integral(rec, x, rec.params.rho(), t));
  }
  return replacement_moment(integrals, c_n);
}

Estimate replacement_moment(std::span<const double> integrals, double c_n) {
  std::vector<double> sq(integrals.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double v = c_n * integrals[i];
    sq[i] = v * v;
  }
  const auto s = stats::summarize(sq);
  return {s.mean, s.std_error};
}

stats::LineFit log_log_slope(std::span<const double> n, std::span<const Estimate> values) {
  if (n.size() != values.size()) throw std::invalid_argument("log_log_slope: length mismatch");
  std::vector<double> lx, ly, sigma;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(values[i].value > 0.0)) {
      throw std::invalid_argument("log_log_slope: values must be positive");
    }
    lx.push_back(std::log(n[i]));
    ly.push_back(std::log(values[i].value));
    sigma.push_back(values[i].std_error > 0.0 ? values[i].std_error / values[i].value : 1.0);
  }
  return stats::weighted_line_fit(lx, ly, sigma);
}

}  // namespace slowsep::fluct
