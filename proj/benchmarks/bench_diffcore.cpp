#include <benchmark/benchmark.h>

#include "tsclab/agent/dqn.hpp"
#include "tsclab/agent/qnet.hpp"
#include "tsclab/diffcore/optim.hpp"
#include "tsclab/rng.hpp"

using namespace tsclab;

static void QForward(benchmark::State& state) {
  Rng rng(1);
  const diffcore::ParamStore params = agent::init_qnet_params(24, 32, rng);
  std::vector<double> s(24);
  for (double& v : s) v = rng.uniform(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(agent::q_values(params, s));
}
BENCHMARK(QForward);

static void DqnGradientStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  Rng rng(2);
  agent::QNet qnet = agent::QNet::init(24, 32, rng);
  std::vector<agent::Transition> ts(batch);
  for (auto& t : ts) {
    t.state.resize(24);
    t.next_state.resize(24);
    for (double& v : t.state) v = rng.uniform(0, 1);
    for (double& v : t.next_state) v = rng.uniform(0, 1);
    t.action = static_cast<int>(rng.uniform_int(8));
    t.reward = -rng.uniform(0, 1);
  }
  std::vector<const agent::Transition*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  for (auto _ : state) {
    const diffcore::Grads g =
        agent::dqn_loss_grads(qnet.online, qnet.target, ptrs, 0.8);
    diffcore::plain_gradient_step(qnet.online, g, 1e-3);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(DqnGradientStep)->Arg(8)->Arg(32)->Arg(128);
