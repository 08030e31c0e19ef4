#include "slowsep/random.hpp"

#include <cmath>

namespace slowsep {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream)
    : master_seed_(master_seed), stream_(stream), engine_(seeded_engine(master_seed, stream)) {}

double RandomStream::exponential(double rate) noexcept {
  // 1 - u lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform()) / rate;
}

}  // namespace slowsep
