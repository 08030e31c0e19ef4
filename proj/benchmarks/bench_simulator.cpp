#include <benchmark/benchmark.h>

#include <vector>

#include "slowsep/fluctuation.hpp"
#include "slowsep/lattice.hpp"
#include "slowsep/random.hpp"
#include "slowsep/rate_index.hpp"
#include "slowsep/simulator.hpp"
#include "slowsep/test_function.hpp"

namespace {

void BM_RateIndexSampleUpdate(benchmark::State& state) {
  const auto leaves = static_cast<std::size_t>(state.range(0));
  std::vector<double> rates(leaves, 1.0);
  slowsep::kmc::RateIndex index(rates);
  slowsep::RandomStream rng(1, 0);
  for (auto _ : state) {
    const auto leaf = index.sample(rng.uniform() * index.total());
    index.update(leaf, rng.bernoulli(0.5) ? 1.0 : 0.5);
    benchmark::DoNotOptimize(leaf);
  }
}
BENCHMARK(BM_RateIndexSampleUpdate)->Arg(64)->Arg(256)->Arg(4096);

// Events per second of the accelerated dynamics at equilibrium.
void BM_Trajectory(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool observe = state.range(1) != 0;
  const auto p = slowsep::make_equilibrium_parameters(n, 1.0, 0.5);
  const auto f = slowsep::pde::eigen_test_function(p.regime(), 1);
  const std::vector<double> grid{0.01};
  std::uint64_t events = 0;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    slowsep::RandomStream rng(7, stream++);
    const auto init = slowsep::bernoulli_sample(p, 0.5, rng);
    slowsep::fluct::MartingaleObserver mart("m", f, 0.5);
    std::vector<slowsep::kmc::Observer*> obs;
    if (observe) obs.push_back(&mart);
    slowsep::kmc::RunOptions opts;
    opts.keep_snapshots = false;
    const auto rec = slowsep::kmc::run_trajectory(p, init, 0.01, grid, obs, rng, opts);
    events += rec.event_count;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Trajectory)->Args({100, 0})->Args({100, 1})->Args({200, 0})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
