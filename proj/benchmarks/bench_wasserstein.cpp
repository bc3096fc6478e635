#include <benchmark/benchmark.h>

#include "tsclab/flow/wasserstein.hpp"
#include "tsclab/rng.hpp"

using namespace tsclab;

namespace {

flow::FlowSet random_set(int members, std::uint64_t seed) {
  std::vector<flow::Route> routes{{"r0", {}}, {"r1", {}}, {"r2", {}}, {"r3", {}}};
  Rng rng(seed);
  flow::FlowSet set;
  for (int i = 0; i < members; ++i) {
    flow::FlowMatrix m(routes, 12, 300);
    for (int& c : m.counts) c = static_cast<int>(rng.uniform_int(12));
    if (m.total() == 0) m.counts[0] = 1;
    set.members.push_back(std::move(m));
  }
  return set;
}

}  // namespace

static void ExactWasserstein(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const flow::FlowSet a = random_set(n, 1);
  const flow::FlowSet b = random_set(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(flow::exact_wasserstein(a, b));
  state.SetComplexityN(n);
}
BENCHMARK(ExactWasserstein)->RangeMultiplier(2)->Range(4, 64)->Complexity();
