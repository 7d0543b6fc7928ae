#include <benchmark/benchmark.h>

#include <random>

#include "dmpath/lp.hpp"
#include "dmpath/model.hpp"
#include "dmpath/stochastic.hpp"

using namespace dmpath;

namespace {

// Same shape as `dmpath bench`: one wide path carries the whole rate.
Network random_network(std::size_t n, std::size_t m) {
  std::mt19937_64 rng(0x5eed0000 + 97 * n + m);
  std::uniform_real_distribution<double> wide(90e6, 135e6), bw(25e6, 110e6), delay(0.05, 0.5),
      loss(0.0, 0.3);
  std::vector<PathSpec> paths(n - 1);
  for (auto& p : paths) {
    p.bandwidth_bits_per_s = &p == &paths.front() ? wide(rng) : bw(rng);
    p.delay = DelayModel::fixed(delay(rng));
    p.loss_prob = loss(rng);
  }
  return Network(paths, m);
}

Workload workload() {
  Workload w;
  w.rate_bits_per_s = 90e6;
  w.lifetime_s = 0.8;
  return w;
}

void BM_Solve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const Workload w = workload();
  const LpProblem lp = build_quality_lp(augment_blackhole(random_network(n, m), w), w);
  for (auto _ : state) benchmark::DoNotOptimize(solve(lp));
  state.counters["variables"] = static_cast<double>(lp.variables());
}

void BM_BuildAndSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  const Workload w = workload();
  const Network net = random_network(n, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(build_quality_lp(augment_blackhole(net, w), w)));
  }
}

void BM_GammaTimeouts(benchmark::State& state) {
  Workload w;
  w.rate_bits_per_s = 90e6;
  w.lifetime_s = 0.75;
  PathSpec a, b;
  a.bandwidth_bits_per_s = 80e6;
  a.delay = DelayModel::shifted_gamma(0.4, 10, 0.004);
  a.loss_prob = 0.2;
  b.bandwidth_bits_per_s = 20e6;
  b.delay = DelayModel::shifted_gamma(0.1, 5, 0.002);
  const Network net = augment_blackhole(Network({a, b}, 2), w);
  for (auto _ : state) {
    const stochastic::StochasticModel model(net, w);
    benchmark::DoNotOptimize(model.optimize_timeouts());
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int m = 1; m <= 3; ++m) {
    for (int n = 2; n <= 5; ++n) b->Args({n, m});
  }
}

}  // namespace

BENCHMARK(BM_Solve)->Apply(shapes)->ArgNames({"n", "m"});
BENCHMARK(BM_BuildAndSolve)->Apply(shapes)->ArgNames({"n", "m"});
BENCHMARK(BM_GammaTimeouts)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
