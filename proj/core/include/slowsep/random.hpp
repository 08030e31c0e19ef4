#pragma once

#include <cstdint>
#include <random>

namespace slowsep {

/// Per-replica random stream. Stream r of master seed s is seeded from the
/// pair (s, r) through std::seed_seq, so replicas are reproducible in any
/// execution order.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exp(rate) waiting time.
  double exponential(double rate) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace slowsep
