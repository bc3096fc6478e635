#include <benchmark/benchmark.h>

#include "tsclab/meta/kmeans.hpp"
#include "tsclab/rng.hpp"

using namespace tsclab;

static void KmeansRecluster(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng(7);
  std::vector<std::vector<double>> pts(n, std::vector<double>(58));
  for (auto& p : pts)
    for (double& v : p) v = rng.gaussian(0, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(meta::kmeans_recluster(pts, k, seed++));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(KmeansRecluster)->Args({16, 2})->Args({64, 3})->Args({256, 5});
