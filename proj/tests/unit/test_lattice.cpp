#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slowsep/lattice.hpp"
#include "slowsep/random.hpp"

using namespace slowsep;

TEST_CASE("parameters validate and tag the regime") {
  const auto p = make_parameters(4, 0, 0.3, 0.7, 0.5);
  CHECK(p.regime() == Regime::Dirichlet);
  CHECK(p.sites() == 3);
  CHECK(p.bonds() == 4);
  CHECK(make_parameters(10, 0.5, 0.3, 0.7, 0.5).regime() == Regime::Dirichlet);
  CHECK(make_parameters(10, 1, 0.3, 0.7, 0.5).regime() == Regime::Robin);
  CHECK(make_parameters(10, 2, 0.3, 0.7, 0.5).regime() == Regime::Neumann);

  CHECK_THROWS_AS(make_parameters(1, 0, 0.3, 0.7, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_parameters(10, 1, 0.5, 1.2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_parameters(10, -1, 0.5, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_parameters(10, 1, 0.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_parameters(10, 1, 0.5, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_parameters(10, NAN, 0.5, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("jump rates") {
  SUBCASE("empty lattice, theta = 0") {
    const auto p = make_parameters(4, 0, 0.3, 0.7, 0.5);
    const auto r = jump_rates(p, Configuration{0, 0, 0});
    REQUIRE(r.size() == 4);
    CHECK(r[0] == doctest::Approx(0.3));
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 1.0);
    CHECK(r[3] == doctest::Approx(0.7));
  }
  SUBCASE("occupied first site, theta = 1") {
    const auto p = make_parameters(10, 1, 0.2, 0.5, 0.5);
    Configuration eta(9);
    eta.set(1, true);
    CHECK(jump_rates(p, eta)[0] == doctest::Approx(0.08).epsilon(1e-14));
  }
  SUBCASE("boundary rates scale exactly as n^-theta") {
    Configuration eta{1, 0, 1, 1, 0, 0, 1};
    const auto fast = jump_rates(make_parameters(8, 0, 0.25, 0.6, 0.5), eta);
    const auto slow = jump_rates(make_parameters(8, 1.5, 0.25, 0.6, 0.5), eta);
    const double scale = std::pow(8.0, -1.5);
    CHECK(slow[0] == doctest::Approx(fast[0] * scale).epsilon(1e-14));
    CHECK(slow[7] == doctest::Approx(fast[7] * scale).epsilon(1e-14));
    for (int b = 1; b < 7; ++b) {
      CHECK(fast[static_cast<std::size_t>(b)] == 1.0);
      CHECK(slow[static_cast<std::size_t>(b)] == 1.0);
    }
    CHECK(slow[0] > 0.0);
    CHECK(slow[7] > 0.0);
  }
  CHECK_THROWS(jump_rates(make_parameters(4, 0, 0.3, 0.7, 0.5), Configuration{0, 0}));
}

TEST_CASE("apply_event swaps, flips and leaves the input alone") {
  const Configuration eta{1, 0, 0};
  CHECK(apply_event(eta, {1}) == Configuration{0, 1, 0});
  CHECK(apply_event(eta, {0}) == Configuration{0, 0, 0});
  CHECK(apply_event(eta, {3}) == Configuration{1, 0, 1});
  CHECK(apply_event(Configuration{1, 1, 0}, {1}) == Configuration{1, 1, 0});
  CHECK(eta == Configuration{1, 0, 0});
  CHECK_THROWS(apply_event(eta, {4}));
  CHECK_THROWS(apply_event(eta, {-1}));
}

TEST_CASE("apply_event conserves bulk mass and is an involution") {
  RandomStream rng(3, 0);
  const auto p = make_parameters(13, 0.5, 0.3, 0.6, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto eta = bernoulli_sample(p, 0.5, rng);
    const int bond = static_cast<int>(rng.uniform() * 13);
    const auto next = apply_event(eta, {bond});
    const long diff = static_cast<long>(next.particle_count()) - static_cast<long>(eta.particle_count());
    if (bond == 0 || bond == 12) {
      CHECK(std::abs(diff) == 1);
    } else {
      CHECK(diff == 0);
    }
    CHECK(apply_event(next, {bond}) == eta);
  }
}

TEST_CASE("configuration storage") {
  Configuration big(130);
  big.set(1, true);
  big.set(64, true);
  big.set(65, true);
  big.set(130, true);
  CHECK(big.particle_count() == 4);
  CHECK(big.occupied(65));
  CHECK_FALSE(big.occupied(66));
  big.flip(65);
  CHECK_FALSE(big.occupied(65));

  const auto c = Configuration::from_index(0b1011, 5);
  CHECK(c.occupations() == std::vector<int>{1, 1, 0, 1, 0});
  CHECK(c.to_index() == 0b1011);
}

TEST_CASE("Bernoulli sampling") {
  SUBCASE("n = 4, rho = 1/2 is uniform over the 8 states") {
    const auto p = make_parameters(4, 0, 0.5, 0.5, 0.5);
    RandomStream rng(17, 1);
    std::vector<int> counts(8, 0);
    const int draws = 80000;
    for (int i = 0; i < draws; ++i) ++counts[bernoulli_sample(p, 0.5, rng).to_index()];
    for (int k : counts) CHECK(std::abs(k - draws / 8) < 4.0 * std::sqrt(draws / 8.0 * (7.0 / 8.0)));
  }
  SUBCASE("mean occupation at rho = 0.3 within a CLT band") {
    const auto p = make_parameters(2, 0, 0.5, 0.5, 0.5);
    RandomStream rng(5, 2);
    const int draws = 100000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) sum += bernoulli_sample(p, 0.3, rng).at(1);
    CHECK(std::abs(sum / draws - 0.3) < 3.0 * std::sqrt(0.21 / draws));
  }
  SUBCASE("rho near one gives the full configuration") {
    const auto p = make_parameters(6, 0, 0.5, 0.5, 0.5);
    RandomStream rng(5, 3);
    CHECK(bernoulli_sample(p, 1.0 - 1e-12, rng).particle_count() == 5);
  }
}

TEST_CASE("random streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
}
