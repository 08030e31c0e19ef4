#pragma once

#include <functional>
#include <string>

#include "slowsep/lattice.hpp"

namespace slowsep::pde {

/// Smooth function on [0, 1] with its first two derivatives, tagged with the
/// boundary regime whose test-function space it is meant to belong to.
struct TestFunction {
  Regime regime = Regime::Dirichlet;
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
  std::string description;

  double operator()(double u) const { return value(u); }
};

TestFunction make_test_function(Regime regime, std::function<double(double)> f,
                                std::function<double(double)> df,
                                std::function<double(double)> d2f, std::string description);

/// k-th eigenfunction of the regime (k >= 1 for Dirichlet, k >= 0 otherwise).
TestFunction eigen_test_function(Regime regime, int k);

/// u(1-u), a polynomial member for the Dirichlet regime at order zero.
TestFunction dirichlet_polynomial();

TestFunction constant_function(Regime regime, double c);

/// a f + b g; the regime is taken from f.
TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g);

/// Largest violation of the order-zero boundary conditions:
/// Dirichlet f(0) = f(1) = 0, Robin f'(0) = f(0) and f'(1) = -f(1),
/// Neumann f'(0) = f'(1) = 0.
double boundary_residual(const TestFunction& f);

/// Integral of f^2 over [0, 1] (composite Simpson, 4096 panels).
double squared_norm(const TestFunction& f);

}  // namespace slowsep::pde
