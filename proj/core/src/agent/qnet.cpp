#include "tsclab/agent/qnet.hpp"

#include <stdexcept>

#include "tsclab/diffcore/kernels.hpp"

namespace tsclab::agent {

std::vector<double> encode_state(const sim::Roadnet& net, int intersection,
                                 const sim::Observation& obs) {
  const sim::Intersection& inter = net.intersections.at(intersection);
  if (obs.incoming_counts.size() != inter.in_lanes.size() ||
      obs.outgoing_counts.size() != inter.out_lanes.size())
    throw std::invalid_argument("encode_state: observation size mismatch");
  std::vector<double> s;
  s.reserve(kActionCount + inter.in_lanes.size() + inter.out_lanes.size());
  for (int p = 0; p < kActionCount; ++p)
    s.push_back(p == obs.phase ? 1.0 : 0.0);
  for (std::size_t i = 0; i < inter.in_lanes.size(); ++i)
    s.push_back(static_cast<double>(obs.incoming_counts[i]) /
                net.lanes[inter.in_lanes[i]].x_max);
  for (std::size_t i = 0; i < inter.out_lanes.size(); ++i)
    s.push_back(static_cast<double>(obs.outgoing_counts[i]) /
                net.lanes[inter.out_lanes[i]].x_max);
  return s;
}

int state_dim(const sim::Roadnet& net, int intersection) {
  const sim::Intersection& inter = net.intersections.at(intersection);
  return kActionCount + static_cast<int>(inter.in_lanes.size()) +
         static_cast<int>(inter.out_lanes.size());
}

ParamStore init_qnet_params(int input_dim, int hidden, Rng& rng) {
  ParamStore p;
  diffcore::init_dense_layer(p, "fc1", input_dim, hidden, rng);
  diffcore::init_dense_layer(p, "fc2", hidden, hidden, rng);
  diffcore::init_dense_layer(p, "out", hidden, kActionCount, rng);
  return p;
}

std::vector<double> q_values(const ParamStore& params,
                             std::span<const double> state) {
  std::vector<double> h = diffcore::dense_forward(params, "fc1", state);
  diffcore::relu_inplace(h);
  h = diffcore::dense_forward(params, "fc2", h);
  diffcore::relu_inplace(h);
  return diffcore::dense_forward(params, "out", h);
}

Tape::VarId qnet_graph(Tape& tape,
                       const std::map<std::string, Tape::VarId>& pv,
                       Tape::VarId state) {
  Tape::VarId h =
      tape.relu(tape.dense(pv.at("fc1.w"), pv.at("fc1.b"), state));
  h = tape.relu(tape.dense(pv.at("fc2.w"), pv.at("fc2.b"), h));
  return tape.dense(pv.at("out.w"), pv.at("out.b"), h);
}

}  // namespace tsclab::agent
