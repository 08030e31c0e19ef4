#include "slowsep/discrete_operators.hpp"

#include <stdexcept>

namespace slowsep::pde {

DiscreteOperators discrete_operators(const TestFunction& f, int n) {
  if (n < 2) throw std::invalid_argument("discrete_operators: n must be >= 2");
  const double dn = n;
  std::vector<double> samples(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) samples[static_cast<std::size_t>(x)] = f.value(x / dn);
  auto at = [&](int x) { return samples[static_cast<std::size_t>(x)]; };

  DiscreteOperators ops;
  ops.n = n;
  ops.laplacian_values.resize(static_cast<std::size_t>(n - 1));
  ops.grad_plus_values.resize(static_cast<std::size_t>(n));
  ops.grad_minus_values.resize(static_cast<std::size_t>(n));
  for (int x = 1; x <= n - 1; ++x) {
    ops.laplacian_values[static_cast<std::size_t>(x - 1)] = dn * dn * (at(x + 1) + at(x - 1) - 2.0 * at(x));
  }
  for (int x = 0; x <= n - 1; ++x) ops.grad_plus_values[static_cast<std::size_t>(x)] = dn * (at(x + 1) - at(x));
  for (int x = 1; x <= n; ++x) ops.grad_minus_values[static_cast<std::size_t>(x - 1)] = dn * (at(x) - at(x - 1));
  return ops;
}

}  // namespace slowsep::pde
