#include "slowsep/rate_index.hpp"

#include <bit>
#include <cmath>

namespace slowsep::kmc {

RateIndex::RateIndex(std::size_t leaves)
    : leaves_(leaves), base_(std::bit_ceil(leaves == 0 ? std::size_t{1} : leaves)),
      tree_(2 * base_, 0.0) {}

RateIndex::RateIndex(std::span<const double> rates) : RateIndex(rates.size()) {
  for (std::size_t i = 0; i < rates.size(); ++i) tree_[base_ + i] = rates[i];
  rebuild();
}

void RateIndex::update(std::size_t leaf, double rate) noexcept {
  std::size_t node = base_ + leaf;
  const double delta = rate - tree_[node];
  if (delta == 0.0) return;
  tree_[node] = rate;
  for (node >>= 1; node >= 1; node >>= 1) tree_[node] += delta;
}

std::size_t RateIndex::sample(const double original) const noexcept {
  double target = original;
  // Branch-free descent; roundoff can at worst land on an empty leaf next to
  // the intended one, which the careful descent below resolves.
  std::size_t node = 1;
  while (node < base_) {
    const std::size_t left = 2 * node;
    const double left_mass = tree_[left];
    const bool right = !(target < left_mass);
    target -= right ? left_mass : 0.0;
    node = left + static_cast<std::size_t>(right);
  }
  if (tree_[node] > 0.0) return node - base_;
  return careful_sample(original);
}

std::size_t RateIndex::careful_sample(double target) const noexcept {
  std::size_t node = 1;
  while (node < base_) {
    const std::size_t left = 2 * node;
    const double left_mass = tree_[left];
    // Never descend into an empty child when its sibling has mass.
    if (target < left_mass && left_mass > 0.0) {
      node = left;
    } else if (tree_[left + 1] > 0.0) {
      target -= left_mass;
      node = left + 1;
    } else {
      node = left;
    }
  }
  return node - base_;
}

double RateIndex::rebuild() noexcept {
  const double before = total();
  for (std::size_t node = base_ - 1; node >= 1; --node) {
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }
  return std::abs(before - total());
}

double RateIndex::leaf_sum() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < leaves_; ++i) s += tree_[base_ + i];
  return s;
}

}  // namespace slowsep::kmc
