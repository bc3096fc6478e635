#pragma once

#include <map>
#include <span>
#include <vector>

#include "tsclab/diffcore/param_store.hpp"
#include "tsclab/diffcore/tape.hpp"
#include "tsclab/rng.hpp"
#include "tsclab/sim/roadnet.hpp"
#include "tsclab/sim/world.hpp"

namespace tsclab::agent {

using diffcore::ParamStore;
using diffcore::Tape;

inline constexpr int kActionCount = sim::kPhaseCount;

// [one-hot phase(8) | incoming counts / x_max | outgoing counts / x_max],
// lane order fixed by the roadnet's sorted lane ids.
std::vector<double> encode_state(const sim::Roadnet& net, int intersection,
                                 const sim::Observation& obs);

int state_dim(const sim::Roadnet& net, int intersection);

// fc1 -> ReLU -> fc2 -> ReLU -> out (8 Q-values, identity).
ParamStore init_qnet_params(int input_dim, int hidden, Rng& rng);

std::vector<double> q_values(const ParamStore& params,
                             std::span<const double> state);

Tape::VarId qnet_graph(Tape& tape,
                       const std::map<std::string, Tape::VarId>& pv,
                       Tape::VarId state);

// Online parameters plus the target copy that only changes via sync.
struct QNet {
  ParamStore online;
  ParamStore target;
  long grad_steps = 0;

  static QNet init(int input_dim, int hidden, Rng& rng) {
    QNet q;
    q.online = init_qnet_params(input_dim, hidden, rng);
    q.target = q.online;
    return q;
  }

  std::vector<double> q_forward(std::span<const double> s) const {
    return q_values(online, s);
  }
  void sync_target() { target = online; }
};

}  // namespace tsclab::agent
