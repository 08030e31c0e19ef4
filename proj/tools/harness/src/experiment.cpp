#include "slowsep/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <new>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "slowsep/estimators.hpp"
#include "slowsep/exact_oracle.hpp"
#include "slowsep/fluctuation.hpp"
#include "slowsep/heat.hpp"
#include "slowsep/lattice.hpp"
#include "slowsep/parallel.hpp"
#include "slowsep/random.hpp"
#include "slowsep/simulator.hpp"
#include "slowsep/spectral.hpp"
#include "slowsep/stats.hpp"
#include "slowsep/test_function.hpp"
#include "slowsep/trajectory_io.hpp"

namespace slowsep::harness {

namespace {

using json = nlohmann::ordered_json;

// Site marginals are compared against the exact law only on small lattices.
constexpr int kMaxMarginalCheckSize = 10;
// Largest n for the enumerated quadratic-variation identity.
constexpr int kMaxQvIdentitySize = 8;

std::uint64_t stream_id(std::size_t cell, std::size_t sub, std::size_t replica) {
  return (static_cast<std::uint64_t>(cell) << 40) | (static_cast<std::uint64_t>(sub) << 32) |
         static_cast<std::uint64_t>(replica);
}

std::string cell_label(int n, double theta) {
  return (n > 0 ? "n" + std::to_string(n) + "_" : std::string()) + "theta" + format_number(theta);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string header) { out_ << header << '\n'; }
  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  std::ostringstream out_;
};

double l1_distance(std::span<const double> a, std::span<const double> b, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / n;
}

// Expected L1 distance produced by Monte Carlo noise alone: E|N(0, se^2)| = se sqrt(2/pi).
double noise_floor(std::span<const double> se, int n) {
  double s = 0.0;
  for (double v : se) s += v * std::sqrt(2.0 / std::numbers::pi);
  return s / n;
}

std::vector<double> initial_profile(const ExperimentConfig& cfg, const Parameters& p) {
  std::vector<double> d(static_cast<std::size_t>(p.sites()));
  for (int x = 1; x < p.n(); ++x) {
    double v = cfg.rho0;
    if (cfg.initial == InitialData::Step) v = 2 * x < p.n() ? 1.0 : 0.0;
    if (cfg.initial == InitialData::Equilibrium) v = cfg.rho;
    d[static_cast<std::size_t>(x - 1)] = v;
  }
  return d;
}

double initial_density(const ExperimentConfig& cfg, double u) {
  switch (cfg.initial) {
    case InitialData::Step:
      return u < 0.5 ? 1.0 : 0.0;
    case InitialData::Equilibrium:
      return cfg.rho;
    case InitialData::Flat:
      break;
  }
  return cfg.rho0;
}

std::vector<double> with_time_zero(std::vector<double> grid) {
  if (grid.empty() || grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  return grid;
}

pde::TestFunction regime_test_function(const ExperimentConfig& cfg, Regime regime) {
  const int k = regime == Regime::Dirichlet ? std::max(cfg.mode, 1) : cfg.mode;
  return pde::eigen_test_function(regime, k);
}

// ---------------------------------------------------------------------------

CellReport exact_check(const ExperimentConfig& cfg, int n, double theta, std::size_t cell) {
  CellReport rep;
  const auto& tol = cfg.tolerances;
  const auto p = make_equilibrium_parameters(n, theta, cfg.rho);
  const auto q = exact::build_generator(p);
  const auto nu = exact::product_measure(n, cfg.rho);

  rep.gates.push_back(upper_gate("stationarity_residual", exact::stationarity_residual(q, nu), tol.exact));
  rep.gates.push_back(upper_gate("detailed_balance_residual", exact::detailed_balance_check(p), tol.balance));
  rep.gates.push_back(upper_gate("row_sum_residual", q.max_row_sum_residual(), tol.exact));

  // <-Lf, f>_nu = D_n(f) / 2 for random f.
  RandomStream rng(cfg.seed, stream_id(cell, 0, 0));
  double worst = 0.0;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    std::vector<double> f(q.dimension());
    for (double& v : f) v = 2.0 * rng.uniform() - 1.0;
    const double lhs = exact::generator_form(q, f, nu);
    const double d = exact::dirichlet_form(f, nu, p);
    worst = std::max(worst, std::abs(lhs - 0.5 * d) / (1.0 + std::abs(d)));
  }
  rep.gates.push_back(upper_gate("dirichlet_form_identity", worst, tol.exact));

  // Predicted quadratic variation against the enumerated carre du champ of Y.
  const auto f = regime_test_function(cfg, p.regime());
  const auto w = fluct::field_weights(f, n);
  const auto y = exact::tabulate(n, [&](const Configuration& eta) { return fluct::centered_sum(eta, w, cfg.rho); });
  const double cdc = exact::carre_du_champ(q, y, nu);
  const double qv = fluct::predicted_qv(f, p, 1.0, cfg.rho);
  rep.gates.push_back(upper_gate("qv_identity", std::abs(qv - cdc) / std::max(1.0, std::abs(cdc)), tol.exact, 0.0));

  // Gamma is the generator applied to Y.
  const auto g = fluct::gamma_weights(f, p);
  const auto gamma = exact::tabulate(n, [&](const Configuration& eta) { return fluct::centered_sum(eta, g, cfg.rho); });
  const auto qy = q.apply(y);
  double gamma_err = 0.0, scale = 1.0;
  for (std::size_t s = 0; s < qy.size(); ++s) {
    gamma_err = std::max(gamma_err, std::abs(qy[s] - gamma[s]));
    scale = std::max(scale, std::abs(gamma[s]));
  }
  rep.gates.push_back(upper_gate("gamma_identity", gamma_err / scale, tol.exact));

  // Stationary profile with the configured reservoirs.
  const auto pr = make_parameters(n, theta, cfg.alpha, cfg.beta, cfg.rho);
  const auto qr = exact::build_generator(pr);
  const auto profile = exact::exact_mean_profile(qr, pr);
  const auto closed = exact::closed_form_profile(pr);
  double perr = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) perr = std::max(perr, std::abs(profile[i] - closed[i]));
  rep.gates.push_back(upper_gate("profile_vs_closed_form", perr, tol.profile));
  rep.gates.push_back(upper_gate("profile_recurrence_residual", exact::recurrence_residual(profile, pr), tol.profile));

  CsvWriter csv("x,exact,closed_form");
  for (std::size_t i = 0; i < profile.size(); ++i) csv.row(static_cast<int>(i + 1), profile[i], closed[i]);
  rep.series_csv = csv.str();
  rep.data["states"] = q.dimension();
  rep.data["carre_du_champ"] = cdc;
  rep.data["predicted_qv_per_time"] = qv;
  return rep;
}

// ---------------------------------------------------------------------------

CellReport hydrodynamics(const ExperimentConfig& cfg, int n, double theta, std::size_t cell,
                         unsigned threads) {
  CellReport rep;
  const auto& tol = cfg.tolerances;
  const auto p = make_parameters(n, theta, cfg.alpha, cfg.beta, cfg.rho);
  const auto density = initial_profile(cfg, p);

  auto records = run_replicas(cfg.replicas, threads, [&](std::size_t r) {
    RandomStream rng(cfg.seed, stream_id(cell, 0, r));
    const auto init = product_sample(density, rng);
    return kmc::run_trajectory(p, init, cfg.horizon, cfg.grid, {}, rng);
  });

  pde::HeatOptions opts;
  opts.points = cfg.points;
  opts.dt = cfg.dt;
  opts.horizon = cfg.horizon;
  opts.times = cfg.grid;
  const auto field = pde::solve_heat(p.regime(), [&](double u) { return initial_density(cfg, u); },
                                     cfg.alpha, cfg.beta, opts);

  const bool small = n <= exact::kMaxLatticeSize;
  std::vector<double> exact_law;
  std::optional<exact::GeneratorMatrix> q;
  if (n <= kMaxMarginalCheckSize) {
    q = exact::build_generator(p);
    exact_law = exact::tabulate(n, [&](const Configuration& eta) {
      double pr = 1.0;
      for (std::size_t x = 1; x <= eta.sites(); ++x) pr *= eta.occupied(x) ? density[x - 1] : 1.0 - density[x - 1];
      return pr;
    });
  }

  CsvWriter csv("t,x,u,simulated,std_error,pde,exact_mean");
  json per_time = json::array();
  std::uint64_t events = 0;
  for (const auto& r : records) events += r.event_count;
  for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
    const double t = cfg.grid[k];
    const auto est = kmc::empirical_density_profile(records, t);
    const auto mean = exact::mean_profile_evolution(p, density, t);
    std::vector<double> pde_at(est.mean.size());
    for (int x = 1; x < n; ++x) pde_at[static_cast<std::size_t>(x - 1)] = field.at(k, static_cast<double>(x) / n);
    for (int x = 1; x < n; ++x) {
      const auto i = static_cast<std::size_t>(x - 1);
      csv.row(t, x, static_cast<double>(x) / n, est.mean[i], est.std_error[i], pde_at[i], mean[i]);
    }
    const std::string tag = "_t=" + format_number(t);
    const double l1_pde = l1_distance(est.mean, pde_at, n);
    if (small) {
      rep.gates.push_back(info_gate("l1_vs_pde" + tag, l1_pde));
    } else {
      rep.gates.push_back(upper_gate("l1_vs_pde" + tag, l1_pde, tol.l1));
    }
    rep.gates.push_back(info_gate("l1_vs_exact_mean" + tag, l1_distance(est.mean, mean, n)));
    rep.gates.push_back(info_gate("l1_noise_floor" + tag, noise_floor(est.std_error, n)));
    rep.gates.push_back(info_gate("l1_pde_vs_exact_mean" + tag, l1_distance(pde_at, mean, n)));

    if (q) {
      const auto law = exact::exact_evolution(*q, exact_law, t);
      const auto marg = exact::mean_occupation(law, n);
      const double reps = static_cast<double>(records.size());
      for (int x = 1; x < n; ++x) {
        const auto i = static_cast<std::size_t>(x - 1);
        const double se = std::sqrt(marg[i] * (1.0 - marg[i]) / reps);
        rep.gates.push_back(z_gate("marginal_x=" + std::to_string(x) + tag, est.mean[i], se, marg[i], tol.sigma));
      }
    }
    per_time.push_back({{"t", t}, {"l1_vs_pde", l1_pde}});
  }
  rep.series_csv = csv.str();
  std::ostringstream archive;
  kmc::write_snapshot_binary(archive, records);
  rep.extra_files["snapshots/" + cell_label(n, theta) + ".bin"] = archive.str();
  rep.data["initial"] = std::string(to_string(cfg.initial));
  rep.data["mean_events_per_replica"] = static_cast<double>(events) / static_cast<double>(records.size());
  rep.data["per_time"] = per_time;
  return rep;
}

// ---------------------------------------------------------------------------

CellReport hydrostatics(const ExperimentConfig& cfg, int n, double theta, std::size_t cell,
                        unsigned threads) {
  CellReport rep;
  const auto p = make_parameters(n, theta, cfg.alpha, cfg.beta, cfg.rho);
  const auto density = initial_profile(cfg, p);
  const double from = cfg.burn_in;
  const double to = cfg.burn_in + cfg.window;

  auto averages = run_replicas(cfg.replicas, threads, [&](std::size_t r) {
    RandomStream rng(cfg.seed, stream_id(cell, 0, r));
    const auto init = product_sample(density, rng);
    kmc::OccupationTimeObserver occ(from, to);
    kmc::Observer* obs[] = {&occ};
    kmc::RunOptions opts;
    opts.keep_snapshots = false;
    const auto rec = kmc::run_trajectory(p, init, to, {}, obs, rng, opts);
    return rec.observables.at(occ.name());
  });

  const auto sites = static_cast<std::size_t>(p.sites());
  std::vector<double> mean(sites), se(sites), limit(sites);
  const auto closed = exact::closed_form_profile(p);
  const auto hydro = pde::hydrostatic_profile(theta, cfg.alpha, cfg.beta);
  CsvWriter csv("x,u,simulated,std_error,limit,finite_n");
  for (std::size_t i = 0; i < sites; ++i) {
    std::vector<double> column(averages.size());
    for (std::size_t r = 0; r < averages.size(); ++r) column[r] = averages[r][i];
    const auto s = stats::summarize(column);
    mean[i] = s.mean;
    se[i] = s.std_error;
    const double u = static_cast<double>(i + 1) / n;
    limit[i] = hydro(u);
    csv.row(static_cast<int>(i + 1), u, mean[i], se[i], limit[i], closed[i]);
  }
  rep.gates.push_back(upper_gate("l1_vs_hydrostatic_profile", l1_distance(mean, limit, n), cfg.tolerances.l1));
  rep.gates.push_back(info_gate("l1_vs_finite_n_profile", l1_distance(mean, closed, n)));
  rep.gates.push_back(info_gate("l1_finite_n_vs_limit", l1_distance(closed, limit, n)));
  rep.gates.push_back(info_gate("l1_noise_floor", noise_floor(se, n)));
  rep.series_csv = csv.str();
  rep.data["burn_in"] = cfg.burn_in;
  rep.data["window"] = cfg.window;
  rep.data["limit_profile"] = {{"slope", hydro.slope}, {"intercept", hydro.intercept}};
  return rep;
}

// ---------------------------------------------------------------------------

struct EquilibriumRun {
  std::vector<double> martingale;
  std::vector<double> field;
};

std::vector<EquilibriumRun> equilibrium_runs(const ExperimentConfig& cfg, const Parameters& p,
                                             const pde::TestFunction& f, std::span<const double> grid,
                                             std::size_t cell, unsigned threads) {
  return run_replicas(cfg.replicas, threads, [&](std::size_t r) {
    RandomStream rng(cfg.seed, stream_id(cell, 0, r));
    const auto init = bernoulli_sample(p, cfg.rho, rng);
    fluct::MartingaleObserver mart("martingale", f, cfg.rho);
    kmc::Observer* obs[] = {&mart};
    kmc::RunOptions opts;
    opts.keep_snapshots = false;
    (void)kmc::run_trajectory(p, init, cfg.horizon, grid, obs, rng, opts);
    return EquilibriumRun{mart.martingale(), mart.field()};
  });
}

std::vector<double> column(const std::vector<EquilibriumRun>& runs, bool martingale, std::size_t k) {
  std::vector<double> c(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) c[r] = (martingale ? runs[r].martingale : runs[r].field)[k];
  return c;
}

CellReport qv_check(const ExperimentConfig& cfg, int n, double theta, std::size_t cell, unsigned threads) {
  CellReport rep;
  const double sigma = cfg.tolerances.sigma;
  const auto p = make_equilibrium_parameters(n, theta, cfg.rho);
  const auto f = regime_test_function(cfg, p.regime());
  const auto grid = with_time_zero(cfg.grid);
  const auto runs = equilibrium_runs(cfg, p, f, grid, cell, threads);

  CsvWriter csv("t,mean_M,var_M,var_M_std_error,predicted_qv");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const auto m = column(runs, true, k);
    const auto s = stats::summarize(m);
    const auto var = runs.size() > 1 ? fluct::sample_variance(m) : stats::Estimate{0.0, 0.0};
    const double qv = fluct::predicted_qv(f, p, t, cfg.rho);
    csv.row(t, s.mean, var.value, var.std_error, qv);
    if (t == 0.0) {
      double worst = 0.0;
      for (double v : m) worst = std::max(worst, std::abs(v));
      rep.gates.push_back(upper_gate("martingale_at_zero", worst, 0.0));
      continue;
    }
    const std::string tag = "_t=" + format_number(t);
    rep.gates.push_back(z_gate("martingale_mean" + tag, s.mean, s.std_error, 0.0, sigma));
    rep.gates.push_back(z_gate("martingale_variance" + tag, var.value, var.std_error, qv, sigma));
  }
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    const auto a = column(runs, true, k - 1), b = column(runs, true, k), c = column(runs, true, k + 1);
    std::vector<double> d1(a.size()), d2(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      d1[r] = b[r] - a[r];
      d2[r] = c[r] - b[r];
    }
    const auto cov = fluct::sample_covariance(d1, d2);
    rep.gates.push_back(z_gate("increment_covariance_t=" + format_number(grid[k - 1]) + "/" +
                                   format_number(grid[k]) + "/" + format_number(grid[k + 1]),
                               cov.value, cov.std_error, 0.0, sigma));
  }
  if (n <= kMaxQvIdentitySize) {
    const auto q = exact::build_generator(p);
    const auto nu = exact::product_measure(n, cfg.rho);
    const auto w = fluct::field_weights(f, n);
    const auto y = exact::tabulate(n, [&](const Configuration& eta) { return fluct::centered_sum(eta, w, cfg.rho); });
    const double cdc = exact::carre_du_champ(q, y, nu);
    const double qv = fluct::predicted_qv(f, p, 1.0, cfg.rho);
    rep.gates.push_back(upper_gate("qv_identity", std::abs(qv - cdc) / std::max(1.0, std::abs(cdc)),
                                   cfg.tolerances.exact));
  }
  rep.series_csv = csv.str();
  rep.data["test_function"] = f.description;
  return rep;
}

CellReport ou_covariance(const ExperimentConfig& cfg, int n, double theta, std::size_t cell, unsigned threads) {
  CellReport rep;
  const double sigma = cfg.tolerances.sigma;
  const double chi = cfg.rho * (1.0 - cfg.rho);
  const auto p = make_equilibrium_parameters(n, theta, cfg.rho);
  const auto f = regime_test_function(cfg, p.regime());
  const auto grid = with_time_zero(cfg.grid);
  const auto runs = equilibrium_runs(cfg, p, f, grid, cell, threads);
  const auto basis = pde::eigenbasis(p.regime(), 16);
  const auto w = fluct::field_weights(f, n);

  const auto y0 = column(runs, false, 0);
  const auto var0 = fluct::sample_variance(y0);
  CsvWriter csv("t,covariance,std_error,limit,finite_n");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const auto yt = column(runs, false, k);
    const auto cov = fluct::sample_covariance(y0, yt);
    const auto tf = pde::semigroup_apply(basis, f, t, cfg.points);
    std::vector<double> prod(tf.grid.size());
    for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = tf.values[j] * f.value(tf.grid[j]);
    const double limit = chi * pde::trapezoid(prod);
    const auto ew = exact::mean_relaxation(p, w, t);
    double finite = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) finite += w[i] * ew[i];
    finite *= chi;
    csv.row(t, cov.value, cov.std_error, limit, finite);

    const std::string tag = "_t=" + format_number(t);
    if (t == 0.0) {
      rep.gates.push_back(z_gate("variance" + tag, cov.value, cov.std_error, finite, sigma));
      rep.gates.push_back(info_gate("variance_limit" + tag, cov.value, cov.std_error, limit));
      continue;
    }
    rep.gates.push_back(z_gate("covariance" + tag, cov.value, cov.std_error, limit, sigma));
    Gate exact_gate = info_gate("covariance_finite_n" + tag, cov.value, cov.std_error, finite);
    exact_gate.z = stats::z_score(cov.value, finite, cov.std_error);
    rep.gates.push_back(exact_gate);
    const auto vt = fluct::sample_variance(yt);
    rep.gates.push_back(z_gate("stationary_variance" + tag, vt.value,
                               std::hypot(vt.std_error, var0.std_error), var0.value, sigma));
  }
  rep.series_csv = csv.str();
  rep.data["test_function"] = f.description;
  rep.data["lambda_1"] = basis.mode(p.regime() != Regime::Dirichlet ? static_cast<std::size_t>(cfg.mode)
                                                                    : static_cast<std::size_t>(std::max(cfg.mode, 1) - 1))
                             .eigenvalue;
  return rep;
}

CellReport gaussianity(const ExperimentConfig& cfg, int n, double theta, std::size_t cell, unsigned threads) {
  CellReport rep;
  const double sigma = cfg.tolerances.sigma;
  const auto p = make_equilibrium_parameters(n, theta, cfg.rho);
  const auto f = regime_test_function(cfg, p.regime());
  const auto w = fluct::field_weights(f, n);
  const auto y0 = run_replicas(cfg.replicas, threads, [&](std::size_t r) {
    RandomStream rng(cfg.seed, stream_id(cell, 0, r));
    return fluct::centered_sum(bernoulli_sample(p, cfg.rho, rng), w, cfg.rho);
  });
  const auto g = fluct::initial_gaussianity(y0, f, p, cfg.rho);
  rep.gates.push_back(z_gate("mean", g.mean.value, g.mean.std_error, 0.0, sigma));
  rep.gates.push_back(z_gate("variance", g.variance.value, g.variance.std_error, g.lattice_variance, sigma));
  rep.gates.push_back(info_gate("variance_limit", g.variance.value, g.variance.std_error, g.limit_variance));
  rep.gates.push_back(upper_gate("abs_skewness", std::abs(g.skewness), cfg.tolerances.skewness));
  rep.gates.push_back(info_gate("excess_kurtosis", g.excess_kurtosis));
  rep.gates.push_back(info_gate("jarque_bera_p_value", g.p_value));
  CsvWriter csv("lambda,real_part,std_error,imaginary_part,theory");
  for (const auto& c : g.characteristic) {
    const std::string tag = "_lambda=" + format_number(c.lambda);
    rep.gates.push_back(z_gate("characteristic_real" + tag, c.real_part.value, c.real_part.std_error, c.theory, sigma));
    rep.gates.push_back(z_gate("characteristic_imag" + tag, c.imaginary_part.value, c.imaginary_part.std_error, 0.0, sigma));
    csv.row(c.lambda, c.real_part.value, c.real_part.std_error, c.imaginary_part.value, c.theory);
  }
  rep.series_csv = csv.str();
  rep.data["test_function"] = f.description;
  rep.data["skewness"] = g.skewness;
  rep.data["jarque_bera"] = g.jarque_bera;
  return rep;
}

CellReport replacement_scaling(const ExperimentConfig& cfg, double theta, std::size_t cell, unsigned threads) {
  CellReport rep;
  const double envelope = theta < 1.0 ? theta - 1.0 : 1.0 - theta;
  std::vector<double> ns;
  std::vector<stats::Estimate> moments;
  CsvWriter csv("n,c_n,moment,std_error,bound_shape");
  json per_n = json::array();
  const std::vector<double> grid{cfg.horizon};
  for (std::size_t i = 0; i < cfg.n.size(); ++i) {
    const int n = cfg.n[i];
    const auto p = make_equilibrium_parameters(n, theta, cfg.rho);
    const double dn = n;
    const double c_n = theta > 1.0 ? std::pow(dn, 1.5 - theta) : std::sqrt(dn);
    const auto integrals = run_replicas(cfg.replicas, threads, [&](std::size_t r) {
      RandomStream rng(cfg.seed, stream_id(cell, i, r));
      const auto init = bernoulli_sample(p, cfg.rho, rng);
      fluct::OccupationIntegralObserver left("left", 1, cfg.rho);
      fluct::OccupationIntegralObserver right("right", n - 1, cfg.rho);
      kmc::Observer* obs[] = {&left, &right};
      kmc::RunOptions opts;
      opts.keep_snapshots = false;
      (void)kmc::run_trajectory(p, init, cfg.horizon, grid, obs, rng, opts);
      return std::array<double, 2>{left.series().back(), right.series().back()};
    });
    // Sites 1 and n-1 are equivalent by reflection; average their squared integrals.
    std::vector<double> pooled(integrals.size());
    for (std::size_t r = 0; r < integrals.size(); ++r) {
      const double a = c_n * integrals[r][0], b = c_n * integrals[r][1];
      pooled[r] = 0.5 * (a * a + b * b);
    }
    const auto s = stats::summarize(pooled);
    const stats::Estimate m{s.mean, s.std_error};
    const double bound = c_n * c_n * std::pow(dn, theta) / (dn * dn);
    ns.push_back(dn);
    moments.push_back(m);
    csv.row(n, c_n, m.value, m.std_error, bound);
    rep.gates.push_back(info_gate("moment_n=" + std::to_string(n), m.value, m.std_error));
    per_n.push_back({{"n", n}, {"c_n", c_n}, {"moment", m.value}, {"std_error", m.std_error}});
  }
  const auto fit = fluct::log_log_slope(ns, moments);
  Gate slope = upper_gate("log_log_slope", fit.slope, envelope + cfg.tolerances.slope, envelope);
  slope.std_error = fit.slope_std_error;
  rep.gates.push_back(slope);
  rep.series_csv = csv.str();
  rep.data["envelope_exponent"] = envelope;
  rep.data["per_n"] = per_n;
  return rep;
}

}  // namespace

Gate z_gate(std::string statistic, double estimate, double std_error, double theory, double sigma) {
  Gate g{std::move(statistic), estimate, std_error, theory, stats::z_score(estimate, theory, std_error), sigma,
         Rule::ZScore, true};
  g.pass = std::abs(g.z) <= sigma;
  return g;
}

Gate upper_gate(std::string statistic, double estimate, double tolerance, double theory) {
  Gate g{std::move(statistic), estimate, 0.0, theory, std::numeric_limits<double>::quiet_NaN(), tolerance,
         Rule::Upper, true};
  g.pass = estimate <= tolerance;
  return g;
}

Gate info_gate(std::string statistic, double estimate, double std_error, double theory) {
  return Gate{std::move(statistic), estimate, std_error, theory, std::numeric_limits<double>::quiet_NaN(), 0.0,
              Rule::Info, true};
}

bool CellReport::passed() const {
  if (error) return false;
  return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CellReport run_cell(const ExperimentConfig& cfg, int n, double theta, std::size_t cell_index, unsigned threads) {
  CellReport rep;
  try {
    switch (cfg.kind) {
      case Kind::ExactCheck:
        rep = exact_check(cfg, n, theta, cell_index);
        break;
      case Kind::Hydrodynamics:
        rep = hydrodynamics(cfg, n, theta, cell_index, threads);
        break;
      case Kind::Hydrostatics:
        rep = hydrostatics(cfg, n, theta, cell_index, threads);
        break;
      case Kind::QvCheck:
        rep = qv_check(cfg, n, theta, cell_index, threads);
        break;
      case Kind::Gaussianity:
        rep = gaussianity(cfg, n, theta, cell_index, threads);
        break;
      case Kind::OuCovariance:
        rep = ou_covariance(cfg, n, theta, cell_index, threads);
        break;
      case Kind::ReplacementScaling:
        rep = replacement_scaling(cfg, theta, cell_index, threads);
        n = 0;
        break;
    }
  } catch (const std::bad_alloc&) {
    rep = CellReport{};
    rep.error = "out of memory";
  } catch (const std::exception& e) {
    rep = CellReport{};
    rep.error = e.what();
  }
  if (cfg.kind == Kind::ReplacementScaling) n = 0;
  rep.n = n;
  rep.theta = theta;
  rep.label = cell_label(n, theta);
  return rep;
}

std::vector<CellReport> run_cells(const ExperimentConfig& cfg, unsigned threads) {
  std::vector<CellReport> cells;
  std::size_t index = 0;
  if (cfg.kind == Kind::ReplacementScaling) {
    for (double theta : cfg.theta) cells.push_back(run_cell(cfg, 0, theta, index++, threads));
    return cells;
  }
  for (int n : cfg.n) {
    for (double theta : cfg.theta) cells.push_back(run_cell(cfg, n, theta, index++, threads));
  }
  return cells;
}

std::vector<CellReport> run_pde_cells(const ExperimentConfig& cfg) {
  std::vector<CellReport> cells;
  for (double theta : cfg.theta) {
    CellReport rep;
    rep.theta = theta;
    rep.label = cell_label(0, theta);
    try {
      const Regime regime = regime_for(theta);
      pde::HeatOptions opts;
      opts.points = cfg.points;
      opts.dt = cfg.dt;
      opts.horizon = cfg.horizon > 0.0 ? cfg.horizon : cfg.burn_in + cfg.window;
      opts.times = cfg.grid;
      const auto field = pde::solve_heat(regime, [&](double u) { return initial_density(cfg, u); }, cfg.alpha,
                                         cfg.beta, opts);
      const auto hydro = pde::hydrostatic_profile(theta, cfg.alpha, cfg.beta);
      const double lo = std::min({cfg.alpha, cfg.beta, initial_density(cfg, 0.0), initial_density(cfg, 1.0), cfg.rho0});
      const double hi = std::max({cfg.alpha, cfg.beta, initial_density(cfg, 0.0), initial_density(cfg, 1.0), cfg.rho0});
      rep.gates.push_back(upper_gate("maximum_principle_low", lo - field.min_value(), 1e-9));
      rep.gates.push_back(upper_gate("maximum_principle_high", field.max_value() - hi, 1e-9));
      CsvWriter csv("t,u,rho,hydrostatic");
      for (std::size_t k = 0; k < field.times.size(); ++k) {
        for (std::size_t j = 0; j < field.grid.size(); ++j) {
          csv.row(field.times[k], field.grid[j], field.values[k][j], hydro(field.grid[j]));
        }
        std::vector<double> gap(field.grid.size());
        for (std::size_t j = 0; j < gap.size(); ++j) gap[j] = std::abs(field.values[k][j] - hydro(field.grid[j]));
        rep.gates.push_back(info_gate("l1_to_hydrostatic_t=" + format_number(field.times[k]), pde::trapezoid(gap)));
      }
      rep.series_csv = csv.str();
      const auto basis = pde::eigenbasis(regime, 10);
      CsvWriter bcsv("k,lambda,normalizer");
      for (const auto& m : basis.modes()) bcsv.row(m.index, m.eigenvalue, m.normalizer);
      rep.extra_files["basis/" + rep.label + ".csv"] = bcsv.str();
      rep.data["regime"] = std::string(to_string(regime));
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
    cells.push_back(std::move(rep));
  }
  return cells;
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg, const CellReport& cell) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = std::string(to_string(cfg.kind));
  j["label"] = cell.label;
  if (cell.n > 0) {
    j["n"] = cell.n;
  } else {
    j["n"] = cfg.n;
  }
  j["theta"] = cell.theta;
  j["regime"] = std::string(to_string(regime_for(cell.theta)));
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["rho"] = cfg.rho;
  j["replicas"] = cfg.replicas;
  j["seed"] = cfg.seed;
  j["horizon"] = cfg.horizon;
  j["grid"] = cfg.grid;
  json gates = json::array();
  for (const auto& g : cell.gates) {
    json e;
    e["statistic"] = g.statistic;
    e["estimate"] = g.estimate;
    e["stderr"] = g.std_error;
    e["theory"] = g.theory;
    e["z"] = std::isfinite(g.z) ? json(g.z) : json(nullptr);
    e["tolerance"] = g.tolerance;
    e["rule"] = g.rule == Rule::ZScore ? "z" : g.rule == Rule::Upper ? "upper" : "info";
    e["pass"] = g.pass;
    gates.push_back(std::move(e));
  }
  j["gates"] = std::move(gates);
  if (cell.error) j["error"] = *cell.error;
  j["data"] = cell.data;
  j["passed"] = cell.passed();
  return j;
}

int write_reports(const ExperimentConfig& cfg, const std::vector<CellReport>& cells,
                  const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "cells");
  fs::create_directories(out / "series");
  std::ofstream summary(out / "summary.csv");
  if (!summary) throw std::runtime_error("cannot write " + (out / "summary.csv").string());
  summary << "cell,statistic,estimate,stderr,theory,z,tolerance,rule,pass\n";
  bool all = true;
  for (const auto& cell : cells) {
    std::ofstream js(out / "cells" / (cell.label + ".json"));
    js << to_json(cfg, cell).dump(2) << '\n';
    if (!cell.series_csv.empty()) {
      std::ofstream cs(out / "series" / (cell.label + ".csv"));
      cs << cell.series_csv;
    }
    for (const auto& [name, bytes] : cell.extra_files) {
      const auto path = out / name;
      fs::create_directories(path.parent_path());
      std::ofstream ef(path, std::ios::binary);
      ef << bytes;
    }
    if (cell.error) {
      summary << cell.label << ",error,nan,nan,nan,nan,nan,error,false\n";
    }
    for (const auto& g : cell.gates) {
      summary << cell.label << ',' << g.statistic << ',' << format_number(g.estimate) << ','
              << format_number(g.std_error) << ',' << format_number(g.theory) << ',' << format_number(g.z) << ','
              << format_number(g.tolerance) << ','
              << (g.rule == Rule::ZScore ? "z" : g.rule == Rule::Upper ? "upper" : "info") << ','
              << (g.pass ? "true" : "false") << '\n';
    }
    all = all && cell.passed();
  }
  return all ? 0 : 1;
}

}  // namespace slowsep::harness
