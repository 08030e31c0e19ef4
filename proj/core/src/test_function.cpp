#include "slowsep/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "slowsep/spectral.hpp"

namespace slowsep::pde {

TestFunction make_test_function(Regime regime, std::function<double(double)> f,
                                std::function<double(double)> df,
                                std::function<double(double)> d2f, std::string description) {
  if (!f || !df || !d2f) throw std::invalid_argument("test function needs f, f' and f''");
  return TestFunction{regime, std::move(f), std::move(df), std::move(d2f), std::move(description)};
}

TestFunction eigen_test_function(Regime regime, int k) {
  if (k < 0 || (k == 0 && regime == Regime::Dirichlet)) {
    throw std::invalid_argument("eigenfunction index out of range for regime");
  }
  auto basis = std::make_shared<SpectralBasis>(eigenbasis(regime, std::max(k, 1)));
  const std::size_t i = regime == Regime::Dirichlet ? static_cast<std::size_t>(k - 1)
                                                    : static_cast<std::size_t>(k);
  return TestFunction{
      regime,
      [basis, i](double u) { return basis->value(i, u); },
      [basis, i](double u) { return basis->derivative(i, u); },
      [basis, i](double u) { return basis->second_derivative(i, u); },
      std::string(to_string(regime)) + " eigenfunction k=" + std::to_string(k)};
}

TestFunction dirichlet_polynomial() {
  return TestFunction{Regime::Dirichlet, [](double u) { return u * (1.0 - u); },
                      [](double u) { return 1.0 - 2.0 * u; }, [](double) { return -2.0; },
                      "u(1-u)"};
}

TestFunction constant_function(Regime regime, double c) {
  return TestFunction{regime, [c](double) { return c; }, [](double) { return 0.0; },
                      [](double) { return 0.0; }, "constant " + std::to_string(c)};
}

TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g) {
  return TestFunction{
      f.regime,
      [a, b, f, g](double u) { return a * f.value(u) + b * g.value(u); },
      [a, b, f, g](double u) { return a * f.first(u) + b * g.first(u); },
      [a, b, f, g](double u) { return a * f.second(u) + b * g.second(u); },
      "linear combination"};
}

double boundary_residual(const TestFunction& f) {
  switch (f.regime) {
    case Regime::Dirichlet:
      return std::max(std::abs(f.value(0.0)), std::abs(f.value(1.0)));
    case Regime::Robin:
      return std::max(std::abs(f.first(0.0) - f.value(0.0)), std::abs(f.first(1.0) + f.value(1.0)));
    case Regime::Neumann:
      return std::max(std::abs(f.first(0.0)), std::abs(f.first(1.0)));
  }
  return 0.0;
}

double squared_norm(const TestFunction& f) {
  constexpr int panels = 4096;
  const double h = 1.0 / panels;
  double sum = 0.0;
  for (int j = 0; j <= panels; ++j) {
    const double v = f.value(j * h);
    const double w = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    sum += w * v * v;
  }
  return sum * h / 3.0;
}

}  // namespace slowsep::pde
