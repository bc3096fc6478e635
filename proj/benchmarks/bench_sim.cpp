#include <benchmark/benchmark.h>

#include "tsclab/rng.hpp"
#include "tsclab/sim/roadnet.hpp"
#include "tsclab/sim/world.hpp"

using namespace tsclab;

namespace {

std::vector<sim::VehicleSpec> random_flow(const sim::Roadnet& net, int n,
                                          long horizon, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<sim::VehicleSpec> flow;
  for (int i = 0; i < n; ++i) {
    const sim::Movement& mv =
        net.movements[rng.uniform_int(net.movements.size())];
    flow.push_back(sim::VehicleSpec{
        i,
        {net.lanes[mv.from_lane].id, net.lanes[mv.to_lane].id},
        static_cast<long>(rng.uniform_int(horizon / 2))});
  }
  return flow;
}

}  // namespace

static void SimStep(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  const sim::Roadnet net = sim::build_grid(rows, cols);
  const auto flow = random_flow(net, 20 * rows * cols, 600, 1);
  Rng act_rng(2);
  sim::SimWorld world(net, flow);
  std::vector<int> actions(net.intersections.size(), 0);
  for (auto _ : state) {
    for (int& a : actions) a = static_cast<int>(act_rng.uniform_int(8));
    world.step(actions);
    benchmark::DoNotOptimize(world.on_road());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(net.intersections.size()));
}
BENCHMARK(SimStep)->Args({1, 1})->Args({1, 5})->Args({4, 4});

static void BuildGrid(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const sim::Roadnet net = sim::build_grid(n, n);
    benchmark::DoNotOptimize(net.lanes.size());
  }
}
BENCHMARK(BuildGrid)->Arg(1)->Arg(4)->Arg(8);
