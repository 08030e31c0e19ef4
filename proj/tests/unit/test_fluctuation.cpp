#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "slowsep/estimators.hpp"
#include "slowsep/discrete_operators.hpp"
#include "slowsep/exact_oracle.hpp"
#include "slowsep/fluctuation.hpp"
#include "slowsep/lattice.hpp"
#include "slowsep/random.hpp"
#include "slowsep/simulator.hpp"
#include "slowsep/spectral.hpp"
#include "slowsep/stats.hpp"
#include "slowsep/test_function.hpp"

using namespace slowsep;
using std::numbers::pi;

namespace {

pde::TestFunction identity_function() {
  return pde::make_test_function(
      Regime::Dirichlet, [](double u) { return u; }, [](double) { return 1.0; }, [](double) { return 0.0; }, "u");
}

pde::TestFunction zero_function() { return pde::constant_function(Regime::Dirichlet, 0.0); }

/// Y(f) tabulated over every state, with the field formula written out here.
std::vector<double> tabulate_field(int n, const pde::TestFunction& f, double rho) {
  std::vector<double> y(oracle::states(n));
  for (std::size_t s = 0; s < y.size(); ++s) {
    double v = 0.0;
    for (int x = 1; x < n; ++x) v += f(static_cast<double>(x) / n) * (oracle::bit(s, x) - rho);
    y[s] = v / std::sqrt(static_cast<double>(n));
  }
  return y;
}

std::vector<kmc::TrajectoryRecord> equilibrium_records(const Parameters& p, int replicas, double horizon,
                                                       const std::vector<double>& grid, std::uint64_t seed) {
  std::vector<kmc::TrajectoryRecord> out;
  kmc::RunOptions opts;
  opts.keep_event_log = true;
  for (int r = 0; r < replicas; ++r) {
    RandomStream rng(seed, static_cast<std::uint64_t>(r));
    out.push_back(kmc::run_trajectory(p, bernoulli_sample(p, p.rho(), rng), horizon, grid, {}, rng, opts));
  }
  return out;
}

}  // namespace

TEST_CASE("fluctuation field") {
  const auto p = make_equilibrium_parameters(4, 0, 0.5);
  CHECK(fluct::fluctuation_field(Configuration{1, 0, 0}, identity_function(), p, 0.5) == doctest::Approx(-0.25));
  CHECK(fluct::fluctuation_field(Configuration{1, 0, 0}, zero_function(), p, 0.5) == 0.0);

  SUBCASE("linear in f") {
    const auto q = make_equilibrium_parameters(40, 1, 0.3);
    RandomStream rng(4, 0);
    const auto f = pde::eigen_test_function(Regime::Robin, 1);
    const auto g = pde::eigen_test_function(Regime::Robin, 3);
    const auto h = pde::linear_combination(1.5, f, -0.25, g);
    for (int i = 0; i < 20; ++i) {
      const auto eta = bernoulli_sample(q, 0.3, rng);
      const double lhs = fluct::fluctuation_field(eta, h, q, 0.3);
      const double rhs = 1.5 * fluct::fluctuation_field(eta, f, q, 0.3) - 0.25 * fluct::fluctuation_field(eta, g, q, 0.3);
      CHECK(std::abs(lhs - rhs) < 1e-13);
      CHECK(std::abs(lhs) <= std::sqrt(40.0) * 2.0);
    }
  }
  SUBCASE("variance under the product measure") {
    const int n = 9;
    const double rho = 0.3;
    const auto f = pde::eigen_test_function(Regime::Dirichlet, 1);
    const auto y = tabulate_field(n, f, rho);
    const auto nu = oracle::product_law(n, std::vector<double>(n - 1, rho));
    double m = 0, m2 = 0;
    for (std::size_t s = 0; s < y.size(); ++s) {
      m += nu[s] * y[s];
      m2 += nu[s] * y[s] * y[s];
    }
    double expected = 0.0;
    for (int x = 1; x < n; ++x) expected += std::pow(f(static_cast<double>(x) / n), 2);
    expected *= rho * (1 - rho) / n;
    CHECK(std::abs(m) < 1e-14);
    CHECK(m2 == doctest::Approx(expected).epsilon(1e-12));

    const auto p = make_equilibrium_parameters(n, 0, rho);
    RandomStream rng(10, 0);
    std::vector<double> draws(20000);
    for (auto& d : draws) d = fluct::fluctuation_field(bernoulli_sample(p, rho, rng), f, p, rho);
    const auto v = fluct::sample_variance(draws);
    CHECK(std::abs(v.value - expected) < 4 * v.std_error);
  }
}

TEST_CASE("gamma term") {
  SUBCASE("equals n^2 L applied to the field for every regime") {
    for (int n : {2, 3, 6}) {
      for (double theta : {0.0, 0.5, 1.0, 2.0}) {
        const double rho = 0.35;
        const auto p = make_equilibrium_parameters(n, theta, rho);
        const auto f = pde::eigen_test_function(p.regime(), 1);
        const auto q = oracle::dense_generator(n, theta, rho, rho);
        const auto y = tabulate_field(n, f, rho);
        const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
        const Eigen::VectorXd ly = q * yv;
        for (std::size_t s = 0; s < y.size(); ++s) {
          const auto eta = Configuration::from_index(s, static_cast<std::size_t>(n - 1));
          CHECK(fluct::gamma_term(eta, f, p, rho) == doctest::Approx(ly(static_cast<Eigen::Index>(s))).epsilon(1e-10).scale(1.0));
        }
      }
    }
  }
  SUBCASE("theta = 0 Dirichlet test function closes on Y(Laplacian f)") {
    const int n = 25;
    const auto p = make_equilibrium_parameters(n, 0, 0.5);
    const auto f = pde::dirichlet_polynomial();
    const auto ops = pde::discrete_operators(f, n);
    RandomStream rng(6, 0);
    for (int i = 0; i < 10; ++i) {
      const auto eta = bernoulli_sample(p, 0.5, rng);
      double y = 0.0;
      for (int x = 1; x < n; ++x) y += ops.laplacian(x) * (eta.at(static_cast<std::size_t>(x)) - 0.5);
      CHECK(fluct::gamma_term(eta, f, p, 0.5) == doctest::Approx(y / std::sqrt(n)).epsilon(1e-12));
    }
  }
  SUBCASE("theta = 2, constant test function") {
    const int n = 30;
    const auto p = make_equilibrium_parameters(n, 2, 0.4);
    const auto one = pde::constant_function(Regime::Neumann, 1.0);
    RandomStream rng(7, 0);
    for (int i = 0; i < 10; ++i) {
      const auto eta = bernoulli_sample(p, 0.4, rng);
      const double expected = -std::pow(n, 1.5 - 2.0) * ((eta.at(1) - 0.4) + (eta.at(n - 1) - 0.4));
      CHECK(fluct::gamma_term(eta, one, p, 0.4) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("vanishes when every occupation equals the centring") {
    const auto p = make_equilibrium_parameters(10, 1, 0.5);
    Configuration full(9);
    for (std::size_t x = 1; x <= 9; ++x) full.set(x, true);
    CHECK(fluct::gamma_term(full, pde::eigen_test_function(Regime::Robin, 2), p, 1.0) == 0.0);
  }
}

TEST_CASE("predicted quadratic variation") {
  CHECK(fluct::predicted_qv(zero_function(), make_equilibrium_parameters(50, 1, 0.5), 0.3, 0.5) == 0.0);

  SUBCASE("matches the carre du champ of the generator for n <= 8") {
    for (int n = 2; n <= 8; ++n) {
      for (double theta : {0.0, 0.5, 1.0, 2.0}) {
        const double rho = 0.5;
        const auto p = make_equilibrium_parameters(n, theta, rho);
        const auto f = pde::eigen_test_function(p.regime(), 2);
        const auto q = oracle::dense_generator(n, theta, rho, rho);
        const auto y = tabulate_field(n, f, rho);
        const auto nu = oracle::product_law(n, std::vector<double>(static_cast<std::size_t>(n - 1), rho));
        double cdc = 0.0;
        for (Eigen::Index a = 0; a < q.rows(); ++a) {
          for (Eigen::Index b = 0; b < q.cols(); ++b) {
            if (a != b) cdc += nu[a] * q(a, b) * std::pow(y[b] - y[a], 2);
          }
        }
        CHECK(std::abs(fluct::predicted_qv(f, p, 1.0, rho) - cdc) < 1e-10 * std::max(1.0, cdc));
      }
    }
  }
  SUBCASE("Dirichlet limit 2 chi t pi^2") {
    const auto f = pde::eigen_test_function(Regime::Dirichlet, 1);
    const double t = 0.1, chi = 0.25;
    const double gap1 = std::abs(fluct::predicted_qv(f, make_equilibrium_parameters(100, 0, 0.5), t, 0.5) - 2 * chi * t * pi * pi);
    const double gap2 = std::abs(fluct::predicted_qv(f, make_equilibrium_parameters(400, 0, 0.5), t, 0.5) - 2 * chi * t * pi * pi);
    CHECK(gap1 < 2 * chi * t * pi * pi * 5.0 / 100);
    CHECK(gap2 < gap1 / 2);
  }
  SUBCASE("Robin limit carries the boundary masses") {
    // For an eigenfunction, int f'^2 + f(0)^2 + f(1)^2 = lambda.
    const auto f = pde::eigen_test_function(Regime::Robin, 0);
    const double lambda = pde::robin_eigenvalue(0);
    const double bulk = oracle::simpson([&](double u) { return f.first(u) * f.first(u); });
    CHECK(bulk + f(0) * f(0) + f(1) * f(1) == doctest::Approx(lambda).epsilon(1e-9));
    const double per = fluct::predicted_qv(f, make_equilibrium_parameters(2000, 1, 0.5), 1.0, 0.5) / (2 * 0.25);
    CHECK(per == doctest::Approx(lambda).epsilon(5e-3));
  }
}

TEST_CASE("Dynkin martingale") {
  const int n = 20;
  const double rho = 0.5, T = 0.05;
  const std::vector<double> grid{0.0, 0.01, 0.025, 0.05};

  SUBCASE("pathwise: replay, observer and the theta = 0 closure agree") {
    const auto p = make_equilibrium_parameters(n, 0, rho);
    const auto f = pde::dirichlet_polynomial();
    const auto records = equilibrium_records(p, 5, T, grid, 3);
    const auto ops = pde::discrete_operators(f, n);
    for (const auto& rec : records) {
      const auto ms = fluct::dynkin_martingale(rec, f, p, rho);
      REQUIRE(ms.martingale.size() == 1);
      CHECK(ms.martingale[0][0] == 0.0);

      // Closed form: M_t = Y_t - Y_0 - int_0^t Y_s(Laplacian f) ds, integrated event by event.
      std::vector<double> lap(static_cast<std::size_t>(n - 1));
      for (int x = 1; x < n; ++x) lap[static_cast<std::size_t>(x - 1)] = ops.laplacian(x) / std::sqrt(n);
      auto field = [&](const Configuration& eta, const std::vector<double>& w) {
        double v = 0.0;
        for (int x = 1; x < n; ++x) v += w[static_cast<std::size_t>(x - 1)] * (eta.at(static_cast<std::size_t>(x)) - rho);
        return v;
      };
      std::vector<double> fw(static_cast<std::size_t>(n - 1));
      for (int x = 1; x < n; ++x) fw[static_cast<std::size_t>(x - 1)] = f(static_cast<double>(x) / n) / std::sqrt(n);
      Configuration eta = rec.initial;
      const double y0 = field(eta, fw);
      double integral = 0.0, last = 0.0;
      std::size_t e = 0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        while (e < rec.events->size() && rec.events->times[e] <= grid[k]) {
          integral += (rec.events->times[e] - last) * field(eta, lap);
          last = rec.events->times[e];
          apply_event_in_place(eta, {static_cast<int>(rec.events->bonds[e++])});
        }
        const double m = field(eta, fw) - y0 - (integral + (grid[k] - last) * field(eta, lap));
        CHECK(std::abs(ms.martingale[0][k] - m) < 1e-10);
      }

      fluct::MartingaleObserver obs("m", f, rho);
      kmc::Observer* list[] = {&obs};
      kmc::replay(rec, list);
      for (std::size_t k = 0; k < grid.size(); ++k) CHECK(obs.martingale()[k] == doctest::Approx(ms.martingale[0][k]).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("mean zero, variance equal to the predicted value, orthogonal increments") {
    const auto p = make_equilibrium_parameters(n, 1, rho);
    const auto f = pde::eigen_test_function(Regime::Robin, 1);
    const int replicas = 4000;
    std::vector<std::vector<double>> m(replicas);
    for (int r = 0; r < replicas; ++r) {
      RandomStream rng(17, static_cast<std::uint64_t>(r));
      fluct::MartingaleObserver obs("m", f, rho);
      kmc::Observer* list[] = {&obs};
      kmc::RunOptions opts;
      opts.keep_snapshots = false;
      kmc::run_trajectory(p, bernoulli_sample(p, rho, rng), T, grid, list, rng, opts);
      m[static_cast<std::size_t>(r)] = obs.martingale();
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
      std::vector<double> col(replicas);
      for (int r = 0; r < replicas; ++r) col[static_cast<std::size_t>(r)] = m[static_cast<std::size_t>(r)][k];
      const auto s = stats::summarize(col);
      CHECK(std::abs(s.mean) < 4 * s.std_error);
      const auto v = fluct::sample_variance(col);
      CHECK(std::abs(v.value - fluct::predicted_qv(f, p, grid[k], rho)) < 4 * v.std_error);
    }
    std::vector<double> d1(replicas), d2(replicas);
    for (int r = 0; r < replicas; ++r) {
      const auto& row = m[static_cast<std::size_t>(r)];
      d1[static_cast<std::size_t>(r)] = row[2] - row[1];
      d2[static_cast<std::size_t>(r)] = row[3] - row[2];
    }
    const auto c = fluct::sample_covariance(d1, d2);
    CHECK(std::abs(c.value) < 4 * c.std_error);
  }
  SUBCASE("requires an event log and matching parameters") {
    const auto p = make_equilibrium_parameters(n, 0, rho);
    RandomStream rng(1, 0);
    const auto rec = kmc::run_trajectory(p, bernoulli_sample(p, rho, rng), T, grid, {}, rng);
    CHECK_THROWS_AS(fluct::dynkin_martingale(rec, pde::dirichlet_polynomial(), p, rho), std::invalid_argument);
    const auto logged = equilibrium_records(p, 1, T, grid, 2);
    CHECK_THROWS_AS(fluct::dynkin_martingale(logged[0], pde::dirichlet_polynomial(), make_equilibrium_parameters(n, 1, rho), rho),
                    std::invalid_argument);
  }
}

TEST_CASE("covariance estimation") {
  SUBCASE("sample covariance and jackknife error") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
    const auto c = fluct::sample_covariance(x, y);
    CHECK(c.value == doctest::Approx(1.5));
    CHECK(c.std_error > 0.0);
    CHECK_THROWS_AS(fluct::sample_covariance(std::vector<double>{1}, std::vector<double>{2}), std::invalid_argument);
  }
  SUBCASE("equal-time and stationary covariance from a series") {
    const int n = 30;
    const double rho = 0.5;
    const auto p = make_equilibrium_parameters(n, 2, rho);
    const auto f = pde::eigen_test_function(Regime::Neumann, 1);
    const std::vector<double> grid{0.0, 0.02};
    std::vector<kmc::TrajectoryRecord> records;
    for (int r = 0; r < 6000; ++r) {
      RandomStream rng(21, static_cast<std::uint64_t>(r));
      records.push_back(kmc::run_trajectory(p, bernoulli_sample(p, rho, rng), 0.02, grid, {}, rng));
    }
    const auto series = fluct::fluctuation_series(records, f, rho);
    double finite = 0.0;
    for (int x = 1; x < n; ++x) finite += std::pow(f(static_cast<double>(x) / n), 2);
    finite *= 0.25 / n;
    const auto c00 = fluct::covariance_estimator(series, 0.0, 0.0);
    CHECK(std::abs(c00.value - finite) < 4 * c00.std_error);
    const auto c11 = fluct::covariance_estimator(series, 0.02, 0.02);
    CHECK(std::abs(c11.value - c00.value) < 4 * std::hypot(c11.std_error, c00.std_error));
    // The covariance decays like the finite-n mean relaxation.
    const auto c01 = fluct::covariance_estimator(series, 0.0, 0.02);
    const auto w = fluct::field_weights(f, n);
    const auto ew = exact::mean_relaxation(p, w, 0.02);
    double target = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) target += 0.25 * w[i] * ew[i];
    CHECK(std::abs(c01.value - target) < 4 * c01.std_error);
    CHECK_THROWS(fluct::covariance_estimator(series, 0.01, 0.0));
  }
}

TEST_CASE("initial Gaussianity") {
  const int n = 100;
  const double rho = 0.5;
  const auto p = make_equilibrium_parameters(n, 0, rho);
  const auto f = pde::eigen_test_function(Regime::Dirichlet, 1);
  RandomStream rng(8, 0);
  std::vector<double> y0(10000);
  for (auto& y : y0) y = fluct::fluctuation_field(bernoulli_sample(p, rho, rng), f, p, rho);
  const auto g = fluct::initial_gaussianity(y0, f, p, rho);
  CHECK(g.replicas == 10000);
  CHECK(std::abs(g.variance.value - g.lattice_variance) < 4 * g.variance.std_error);
  CHECK(std::abs(g.skewness) < 0.1);
  CHECK(g.limit_variance == doctest::Approx(0.25).epsilon(1e-9));
  REQUIRE(g.characteristic.size() == 3);
  for (const auto& c : g.characteristic) {
    CHECK(std::abs(c.z) < 4);
    CHECK(std::abs(c.imaginary_part.value) < 4 * c.imaginary_part.std_error);
  }
  CHECK_THROWS_AS(fluct::initial_gaussianity(std::span<const double>(y0.data(), 999), f, p, rho), std::invalid_argument);

  const std::vector<double> zeros(1000, 0.0);
  const auto z = fluct::initial_gaussianity(zeros, zero_function(), p, rho);
  CHECK(z.mean.value == 0.0);
  CHECK(z.variance.value == 0.0);
  CHECK(z.lattice_variance == 0.0);
}

TEST_CASE("replacement moments") {
  const int n = 16;
  const double rho = 0.5;
  const auto p = make_equilibrium_parameters(n, 0.5, rho);
  const auto records = equilibrium_records(p, 50, 0.2, {0.2}, 12);
  CHECK(fluct::replacement_moment(records, 1, 4.0, 0.0).value == 0.0);
  CHECK_THROWS_AS(fluct::replacement_moment(records, 3, 4.0, 0.1), std::invalid_argument);

  std::vector<double> integrals;
  for (const auto& rec : records) {
    // Independent integral of eta_s(1) - rho from the event log.
    Configuration eta = rec.initial;
    double acc = 0.0, last = 0.0;
    for (std::size_t i = 0; i < rec.events->size() && rec.events->times[i] <= 0.1; ++i) {
      acc += (rec.events->times[i] - last) * (eta.at(1) - rho);
      last = rec.events->times[i];
      apply_event_in_place(eta, {static_cast<int>(rec.events->bonds[i])});
    }
    acc += (0.1 - last) * (eta.at(1) - rho);
    CHECK(fluct::occupation_integral(rec, 1, rho, 0.1) == doctest::Approx(acc).epsilon(1e-12).scale(1.0));
    integrals.push_back(acc);
  }
  const auto a = fluct::replacement_moment(records, 1, 4.0, 0.1);
  const auto b = fluct::replacement_moment(integrals, 4.0);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));

  SUBCASE("observer matches the log-based integral") {
    RandomStream rng(3, 3);
    fluct::OccupationIntegralObserver obs("left", n - 1, rho);
    kmc::Observer* list[] = {&obs};
    kmc::RunOptions opts;
    opts.keep_event_log = true;
    const std::vector<double> grid{0.05, 0.2};
    const auto rec = kmc::run_trajectory(p, bernoulli_sample(p, rho, rng), 0.2, grid, list, rng, opts);
    CHECK(obs.series()[0] == doctest::Approx(fluct::occupation_integral(rec, n - 1, rho, 0.05)).epsilon(1e-12).scale(1.0));
    CHECK(obs.series()[1] == doctest::Approx(fluct::occupation_integral(rec, n - 1, rho, 0.2)).epsilon(1e-12).scale(1.0));
  }
  SUBCASE("log-log slope of an exact power law") {
    const std::vector<double> ns{32, 64, 128};
    std::vector<stats::Estimate> v;
    for (double x : ns) v.push_back({3.0 * std::pow(x, -0.5), 0.01 * std::pow(x, -0.5)});
    CHECK(fluct::log_log_slope(ns, v).slope == doctest::Approx(-0.5).epsilon(1e-10));
  }
}
