#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace slowsep::kmc {

/// Complete binary sum tree over non-negative leaf rates. Total-rate query is
/// O(1); proportional sampling and single-leaf updates are O(log n).
class RateIndex {
 public:
  RateIndex() = default;
  explicit RateIndex(std::size_t leaves);
  explicit RateIndex(std::span<const double> rates);

  std::size_t size() const noexcept { return leaves_; }
  double total() const noexcept { return tree_.empty() ? 0.0 : tree_[1]; }
  double rate(std::size_t leaf) const noexcept { return tree_[base_ + leaf]; }

  void update(std::size_t leaf, double rate) noexcept;

  /// Leaf whose cumulative interval contains `target`, for target in [0, total()).
  /// Leaves with zero rate are never returned while any positive leaf exists.
  std::size_t sample(double target) const noexcept;

  /// Recomputes every internal node from the leaves and returns
  /// |stored total - recomputed total| before the rebuild.
  double rebuild() noexcept;

  /// Exact sum of leaf rates.
  double leaf_sum() const noexcept;

 private:
  std::size_t careful_sample(double target) const noexcept;

  std::size_t leaves_ = 0;
  std::size_t base_ = 1;
  std::vector<double> tree_;
};

}  // namespace slowsep::kmc
