#pragma once

#include <cstddef>
#include <vector>

#include "slowsep/test_function.hpp"

namespace slowsep::pde {

/// Lattice operators applied to a test function at scale n:
///   laplacian(x)  = n^2 [f((x+1)/n) + f((x-1)/n) - 2 f(x/n)],  x = 1..n-1
///   grad_plus(x)  = n [f((x+1)/n) - f(x/n)],                   x = 0..n-1
///   grad_minus(x) = n [f(x/n) - f((x-1)/n)],                   x = 1..n
struct DiscreteOperators {
  int n = 0;
  std::vector<double> laplacian_values;   // index x-1
  std::vector<double> grad_plus_values;   // index x
  std::vector<double> grad_minus_values;  // index x-1

  double laplacian(int x) const { return laplacian_values.at(static_cast<std::size_t>(x - 1)); }
  double grad_plus(int x) const { return grad_plus_values.at(static_cast<std::size_t>(x)); }
  double grad_minus(int x) const { return grad_minus_values.at(static_cast<std::size_t>(x - 1)); }
};

DiscreteOperators discrete_operators(const TestFunction& f, int n);

}  // namespace slowsep::pde
