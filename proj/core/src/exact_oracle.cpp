#include "slowsep/exact_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace slowsep::exact {

namespace {

std::size_t state_count(int n) { return std::size_t{1} << (n - 1); }

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(want) +
                                ", got " + std::to_string(got));
  }
}

int lattice_size_for(std::size_t dimension) {
  int n = 1;
  while ((std::size_t{1} << (n - 1)) < dimension) ++n;
  if ((std::size_t{1} << (n - 1)) != dimension) {
    throw std::invalid_argument("distribution length is not a power of two");
  }
  return n;
}

}  // namespace

double GeneratorMatrix::max_exit_rate() const noexcept {
  double m = 0.0;
  for (double d : diagonal_) m = std::max(m, -d);
  return m;
}

double GeneratorMatrix::max_row_sum_residual() const noexcept {
  double worst = 0.0;
  for (std::size_t s = 0; s < dimension(); ++s) {
    double sum = diagonal_[s];
    for (const auto& tr : row(s)) sum += tr.rate;
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

std::vector<double> GeneratorMatrix::left_multiply(std::span<const double> mu) const {
  require_length(mu.size(), dimension(), "left_multiply");
  std::vector<double> out(dimension(), 0.0);
  for (std::size_t s = 0; s < dimension(); ++s) {
    const double m = mu[s];
    out[s] += m * diagonal_[s];
    for (const auto& tr : row(s)) out[tr.target] += m * tr.rate;
  }
  return out;
}

std::vector<double> GeneratorMatrix::apply(std::span<const double> f) const {
  require_length(f.size(), dimension(), "apply");
  std::vector<double> out(dimension());
  for (std::size_t s = 0; s < dimension(); ++s) {
    double acc = diagonal_[s] * f[s];
    for (const auto& tr : row(s)) acc += tr.rate * f[tr.target];
    out[s] = acc;
  }
  return out;
}

GeneratorMatrix build_generator(const Parameters& p) {
  if (p.n() > kMaxLatticeSize) {
    throw std::invalid_argument("n = " + std::to_string(p.n()) +
                                " too large for state enumeration (max " +
                                std::to_string(kMaxLatticeSize) + ")");
  }
  GeneratorMatrix q;
  q.n_ = p.n();
  const std::size_t dim = state_count(p.n());
  const auto sites = static_cast<std::size_t>(p.sites());
  const double accel = p.acceleration();
  q.offsets_.reserve(dim + 1);
  q.offsets_.push_back(0);
  q.diagonal_.assign(dim, 0.0);
  q.entries_.reserve(dim * static_cast<std::size_t>(p.n()));

  for (std::size_t s = 0; s < dim; ++s) {
    const auto eta = Configuration::from_index(s, sites);
    const auto rates = jump_rates(p, eta);
    double exit = 0.0;
    for (int b = 0; b < p.bonds(); ++b) {
      auto image = eta;
      apply_event_in_place(image, BondEvent{b});
      const auto target = image.to_index();
      if (target == s) continue;
      const double r = accel * rates[static_cast<std::size_t>(b)];
      exit += r;
      // For n = 2 both boundary bonds flip the single site; keep one entry per target.
      const auto row_begin = q.entries_.begin() + static_cast<std::ptrdiff_t>(q.offsets_.back());
      auto same = std::find_if(row_begin, q.entries_.end(),
                               [&](const auto& e) { return e.target == target; });
      if (same != q.entries_.end()) {
        same->rate += r;
      } else {
        q.entries_.push_back({static_cast<std::uint32_t>(target), r});
      }
    }
    q.diagonal_[s] = -exit;
    q.offsets_.push_back(q.entries_.size());
  }
  return q;
}

StateDistribution stationary_distribution(const GeneratorMatrix& q) {
  const auto dim = static_cast<Eigen::Index>(q.dimension());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    a(s, s) = q.diagonal(static_cast<std::size_t>(s));
    for (const auto& tr : q.row(static_cast<std::size_t>(s))) {
      a(static_cast<Eigen::Index>(tr.target), s) += tr.rate;
    }
  }
  a.row(dim - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(dim - 1) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-300) {
    throw std::runtime_error("stationary solve: generator matrix is singular");
  }
  const Eigen::VectorXd pi = lu.solve(rhs);
  StateDistribution out(pi.data(), pi.data() + dim);
  double sum = 0.0;
  for (double& v : out) {
    if (!std::isfinite(v)) throw std::runtime_error("stationary solve produced non-finite values");
    v = std::max(v, 0.0);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

double stationarity_residual(const GeneratorMatrix& q, std::span<const double> mu) {
  const auto r = q.left_multiply(mu);
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  return worst;
}

StateDistribution product_measure(int n, double rho) {
  if (n < 2 || n > 31) throw std::invalid_argument("product_measure: n out of range");
  const std::size_t dim = state_count(n);
  StateDistribution mu(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    const int k = std::popcount(s);
    mu[s] = std::pow(rho, k) * std::pow(1.0 - rho, (n - 1) - k);
  }
  return mu;
}

StateDistribution point_mass(const Configuration& eta) {
  StateDistribution mu(std::size_t{1} << eta.sites(), 0.0);
  mu[eta.to_index()] = 1.0;
  return mu;
}

std::vector<double> mean_occupation(std::span<const double> mu, int n) {
  require_length(mu.size(), state_count(n), "mean_occupation");
  std::vector<double> profile(static_cast<std::size_t>(n - 1), 0.0);
  for (std::size_t s = 0; s < mu.size(); ++s) {
    if (mu[s] == 0.0) continue;
    for (int x = 0; x < n - 1; ++x) {
      if ((s >> x) & 1u) profile[static_cast<std::size_t>(x)] += mu[s];
    }
  }
  return profile;
}

std::vector<double> exact_mean_profile(const GeneratorMatrix& q, const Parameters& p) {
  if (q.lattice_size() != p.n()) throw std::invalid_argument("generator and parameters disagree on n");
  return mean_occupation(stationary_distribution(q), p.n());
}

double recurrence_residual(std::span<const double> profile, const Parameters& p) {
  const auto m = static_cast<std::size_t>(p.sites());
  require_length(profile.size(), m, "recurrence_residual");
  const double s = p.boundary_scale();
  auto rho = [&](std::size_t x) { return profile[x - 1]; };
  double worst = 0.0;
  if (m == 1) {
    // Both reservoirs act on the single site.
    return std::abs(s * (p.alpha() - rho(1)) + s * (p.beta() - rho(1)));
  }
  for (std::size_t x = 2; x + 1 <= m; ++x) {
    worst = std::max(worst, std::abs((rho(x + 1) - rho(x)) + (rho(x - 1) - rho(x))));
  }
  worst = std::max(worst, std::abs((rho(2) - rho(1)) + s * (p.alpha() - rho(1))));
  worst = std::max(worst, std::abs(s * (p.beta() - rho(m)) + (rho(m - 1) - rho(m))));
  return worst;
}

std::vector<double> closed_form_profile(const Parameters& p) {
  const double n = p.n();
  const double n_theta = std::pow(n, p.theta());
  const double a = (p.beta() - p.alpha()) / (2.0 * n_theta + n - 2.0);
  const double b = p.alpha() + a * (n_theta - 1.0);
  std::vector<double> profile(static_cast<std::size_t>(p.sites()));
  for (std::size_t x = 1; x <= profile.size(); ++x) profile[x - 1] = a * static_cast<double>(x) + b;
  return profile;
}

StateDistribution exact_evolution(const GeneratorMatrix& q, std::span<const double> mu0, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("exact_evolution: t must be >= 0");
  require_length(mu0.size(), q.dimension(), "exact_evolution");
  StateDistribution mu(mu0.begin(), mu0.end());
  const double lambda = q.max_exit_rate();
  if (t == 0.0 || lambda == 0.0) return mu;

  constexpr double kMaxChunkMean = 16.0;
  constexpr double kTailMass = 1e-15;
  const auto chunks = static_cast<std::size_t>(std::ceil(lambda * t / kMaxChunkMean));
  const double mean = lambda * t / static_cast<double>(chunks);

  std::vector<double> power(mu.size());
  std::vector<double> next(mu.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    power = mu;
    double weight = std::exp(-mean);
    for (std::size_t s = 0; s < mu.size(); ++s) mu[s] = weight * power[s];
    for (std::size_t k = 1;; ++k) {
      // power <- power * (I + Q / lambda)
      const auto flow = q.left_multiply(power);
      for (std::size_t s = 0; s < mu.size(); ++s) next[s] = power[s] + flow[s] / lambda;
      power.swap(next);
      weight *= mean / static_cast<double>(k);
      for (std::size_t s = 0; s < mu.size(); ++s) mu[s] += weight * power[s];
      const double ratio = mean / static_cast<double>(k + 1);
      if (ratio < 0.5 && weight * ratio / (1.0 - ratio) < kTailMass) break;
    }
  }
  return mu;
}

double dirichlet_form(std::span<const double> f, std::span<const double> mu, const Parameters& p) {
  const std::size_t dim = state_count(p.n());
  require_length(f.size(), dim, "dirichlet_form f");
  require_length(mu.size(), dim, "dirichlet_form mu");
  const auto sites = static_cast<std::size_t>(p.sites());
  double total = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    if (mu[s] == 0.0) continue;
    const auto eta = Configuration::from_index(s, sites);
    const auto rates = jump_rates(p, eta);
    for (int b = 0; b < p.bonds(); ++b) {
      const auto image = apply_event(eta, BondEvent{b}).to_index();
      const double d = f[image] - f[s];
      total += mu[s] * rates[static_cast<std::size_t>(b)] * d * d;
    }
  }
  return total;
}

double generator_form(const GeneratorMatrix& q, std::span<const double> f,
                      std::span<const double> mu) {
  require_length(mu.size(), q.dimension(), "generator_form mu");
  const auto qf = q.apply(f);
  const double accel = static_cast<double>(q.lattice_size()) * q.lattice_size();
  double total = 0.0;
  for (std::size_t s = 0; s < q.dimension(); ++s) total -= mu[s] * f[s] * qf[s];
  return total / accel;
}

double carre_du_champ(const GeneratorMatrix& q, std::span<const double> g,
                      std::span<const double> mu) {
  require_length(g.size(), q.dimension(), "carre_du_champ g");
  require_length(mu.size(), q.dimension(), "carre_du_champ mu");
  double total = 0.0;
  for (std::size_t s = 0; s < q.dimension(); ++s) {
    double local = 0.0;
    for (const auto& tr : q.row(s)) {
      const double d = g[tr.target] - g[s];
      local += tr.rate * d * d;
    }
    total += mu[s] * local;
  }
  return total;
}

double detailed_balance_check(const Parameters& p) {
  if (!p.at_equilibrium()) {
    throw std::domain_error("detailed balance only holds for alpha = beta = rho");
  }
  if (p.n() > kMaxLatticeSize) throw std::invalid_argument("n too large for state enumeration");
  const auto nu = product_measure(p.n(), p.rho());
  const auto sites = static_cast<std::size_t>(p.sites());
  double worst = 0.0;
  for (std::size_t s = 0; s < nu.size(); ++s) {
    const auto eta = Configuration::from_index(s, sites);
    const auto rates = jump_rates(p, eta);
    for (int b = 0; b < p.bonds(); ++b) {
      const auto image = apply_event(eta, BondEvent{b});
      const auto back = jump_rates(p, image)[static_cast<std::size_t>(b)];
      const double lhs = rates[static_cast<std::size_t>(b)] * nu[s];
      const double rhs = back * nu[image.to_index()];
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

std::vector<double> mean_relaxation(const Parameters& p, std::span<const double> v, double t) {
  const auto m = static_cast<Eigen::Index>(p.sites());
  require_length(v.size(), static_cast<std::size_t>(m), "mean_relaxation");
  if (!(t >= 0.0)) throw std::invalid_argument("mean_relaxation: t must be >= 0");
  const double n2 = p.acceleration();
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(m, -2.0 * n2);
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max<Eigen::Index>(m - 1, 0), n2);
  diag(0) = -(1.0 + p.boundary_scale()) * n2;
  diag(m - 1) = -(1.0 + p.boundary_scale()) * n2;
  if (m == 1) diag(0) = -2.0 * p.boundary_scale() * n2;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) throw std::runtime_error("mean_relaxation: eigensolve failed");
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), m);
  const Eigen::VectorXd coeffs = eig.eigenvectors().transpose() * x;
  const Eigen::VectorXd decay = (eig.eigenvalues() * t).array().exp().matrix();
  const Eigen::VectorXd out = eig.eigenvectors() * decay.cwiseProduct(coeffs);
  return {out.data(), out.data() + m};
}

std::vector<double> mean_profile_evolution(const Parameters& p, std::span<const double> rho0, double t) {
  const auto ss = closed_form_profile(p);
  require_length(rho0.size(), ss.size(), "mean_profile_evolution");
  std::vector<double> gap(ss.size());
  for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = rho0[i] - ss[i];
  auto out = mean_relaxation(p, gap, t);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += ss[i];
  return out;
}

std::vector<double> tabulate(int n, const std::function<double(const Configuration&)>& f) {
  if (n < 2 || n > kMaxLatticeSize) throw std::invalid_argument("tabulate: n out of range");
  const std::size_t dim = state_count(n);
  std::vector<double> values(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    values[s] = f(Configuration::from_index(s, static_cast<std::size_t>(n - 1)));
  }
  return values;
}

void write_triplets(const GeneratorMatrix& q, std::ostream& out) {
  const auto old = out.precision(17);
  for (std::size_t s = 0; s < q.dimension(); ++s) {
    out << s << ' ' << s << ' ' << q.diagonal(s) << '\n';
    for (const auto& tr : q.row(s)) out << s << ' ' << tr.target << ' ' << tr.rate << '\n';
  }
  out.precision(old);
}

void write_distribution(std::span<const double> mu, std::ostream& out) {
  (void)lattice_size_for(mu.size());
  const auto old = out.precision(17);
  for (std::size_t s = 0; s < mu.size(); ++s) out << s << ' ' << mu[s] << '\n';
  out.precision(old);
}

}  // namespace slowsep::exact
