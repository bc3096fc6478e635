#pragma once

#include <cstdint>
#include <span>

#include "tsclab/agent/qnet.hpp"
#include "tsclab/agent/replay.hpp"

namespace tsclab::agent {

struct DqnConfig {
  double gamma = 0.8;          // discount
  double alpha = 1e-3;         // inner-loop learning rate, Eq.-style step
  int batch_size = 32;
  int target_sync_period = 50; // gradient steps between target syncs
  double eps_start = 0.8;      // epsilon-greedy schedule
  double eps_end = 0.05;
  long eps_decay_steps = 2000; // decisions to anneal over
  int update_cadence = 1;      // gradient steps per agent decision
  std::size_t capacity = 10000;
  int hidden = 32;
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_at(long decision) const;  // linear anneal, clamped
};

// Epsilon-greedy over 8 Q-values: uniform with probability eps, otherwise
// argmax with lowest-index tie-break.
int select_action(std::span<const double> q, double explore_eps, Rng& rng);

// Mean over the batch of (r + gamma * max_a' Q(s',a';target) - Q(s,a))^2;
// the target term is a constant w.r.t. the online parameters.
double dqn_loss(const ParamStore& online, const ParamStore& target,
                std::span<const Transition* const> batch, double gamma);

diffcore::Grads dqn_loss_grads(const ParamStore& online,
                               const ParamStore& target,
                               std::span<const Transition* const> batch,
                               double gamma, double* loss_out = nullptr);

// `steps` plain-gradient steps at rate alpha on fresh seeded batches;
// scheduled target syncs only. Returns false (a no-op) while the memory is
// smaller than the batch size.
bool local_update(QNet& qnet, const ReplayMemory& memory,
                  const DqnConfig& cfg, int steps, Rng& rng);

}  // namespace tsclab::agent
