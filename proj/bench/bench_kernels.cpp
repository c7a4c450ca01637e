#include <benchmark/benchmark.h>

#include "spikechain/graph.hpp"
#include "spikechain/isi_stats.hpp"
#include "spikechain/model.hpp"
#include "spikechain/perfect_sim.hpp"
#include "spikechain/rng.hpp"

using namespace spikechain;

// Arg 1 runs the OpenMP kernel, arg 0 the serial reference.

static void BM_perfect_sample(benchmark::State& state) {
  const auto spec = presets::three_neuron_attractive(0.4, 0.25, 3);
  const CoordinateRng src(55);
  for (auto _ : state) {
    auto f = state.range(0) ? perfect_sample(src, spec, {0, 1, 2}, 0, 4000)
                            : perfect_sample_serial(src, spec, {0, 1, 2}, 0, 4000);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_perfect_sample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_sample_tau(benchmark::State& state) {
  const CoordinateRng src(3);
  for (auto _ : state) {
    auto t = state.range(0) ? sample_tau(100, 1.0, 0, 40, 2000, src)
                            : sample_tau_serial(100, 1.0, 0, 40, 2000, src);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_sample_tau)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_theorem4(benchmark::State& state) {
  Theorem4Config cfg;
  cfg.ns = {20};
  cfg.phi.gamma = 0.2;
  cfg.aging.family = AgingFamily::finite_support;
  cfg.aging.support = 2;
  cfg.graphs = 20;
  cfg.a_graphs = 4;
  cfg.steps = 20000;
  const CoordinateRng src(8);
  for (auto _ : state) {
    auto r = theorem4_experiment(cfg, src, state.range(0) != 0);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_theorem4)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_loss_of_memory(benchmark::State& state) {
  const auto spec = presets::exponential_memory(0.5, 0.2, 2, 3);
  const std::vector<int> grid{2, 4, 8, 12};
  const CoordinateRng src(9);
  for (auto _ : state) {
    auto p = loss_of_memory_profile(spec, 0, grid, 2000, src, state.range(0) != 0);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_loss_of_memory)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
