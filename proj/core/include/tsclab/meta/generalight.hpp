#pragma once

#include <cstdint>
#include <vector>

#include "tsclab/agent/dqn.hpp"
#include "tsclab/flow/matrix.hpp"
#include "tsclab/meta/bank.hpp"
#include "tsclab/meta/features.hpp"
#include "tsclab/sim/roadnet.hpp"

namespace tsclab::meta {

struct MetaConfig {
  int clusters = 3;            // C_n
  int recluster_period = 2;    // C_u, in rounds
  long episode_seconds = 1200; // T
  long learn_start_seconds = 120;  // T_s, meta-test warmup
  double outer_lr = 1e-3;      // beta
  double predictor_lr = 1e-3;  // eta
  int predictor_steps = 200;   // gradient steps per recluster event
  int predictor_hidden = 32;
  int rounds = 8;
  std::uint64_t seed = 0;
  int decision_interval = 10;  // sim-seconds per agent decision
  std::size_t query_memory_budget = 10000;  // split across clusters
  bool train_predictor = true;
  // Exploration rate of the post-adaptation rollout that fills M'_j and the
  // feature collectors; negative -> use dqn.eps_end.
  double query_epsilon = -1.0;
  // Outer gradient steps per cluster per round. The outer updates run at the
  // same cadence as the inner ones (once per agent decision of an episode);
  // 0 -> episode_seconds / decision_interval.
  int outer_steps_per_round = 0;
  agent::DqnConfig dqn;        // inner loop: alpha = dqn.alpha

  double query_eps() const {
    return query_epsilon >= 0.0 ? query_epsilon : dqn.eps_end;
  }
  int outer_steps() const {
    return outer_steps_per_round > 0
               ? outer_steps_per_round
               : static_cast<int>(episode_seconds / decision_interval);
  }

  void validate() const;
};

struct MetaTrainResult {
  ClusterBank bank;
  PredictorNet predictor;
  // theta0 after each round's outer updates; the equivalence oracle
  // compares these across runs.
  std::vector<std::vector<std::vector<ParamStore>>> round_snapshots;
  // Normalized features at the last recluster (empty if none happened).
  std::vector<FlowFeature> last_features;
};

// Clustered meta-training: per round and flow, the agent starts from its
// cluster's initialization, adapts over one episode with inner DQN updates,
// then a post-adaptation rollout fills the cluster query memory and the
// flow's feature collector; per-cluster outer updates follow, and every
// C_u rounds the flows are reclustered, the predictor is refreshed and the
// collectors emptied.
MetaTrainResult meta_train(const sim::Roadnet& net, const flow::FlowSet& flows,
                           const MetaConfig& cfg);

// The single-initialization baseline: meta_train with one cluster and no
// predictor training.
MetaTrainResult maml_train(const sim::Roadnet& net, const flow::FlowSet& flows,
                           const MetaConfig& cfg);

struct MetaTestFlowResult {
  double att = 0.0;
  double freeflow = 0.0;
  int predicted_cluster = 0;
  int nearest_centroid_cluster = 0;  // diagnostic oracle over SAR dims
  std::vector<double> warmup_sar;    // normalized predictor input
  std::vector<double> warmup_action_hist;  // raw warmup action frequencies
  long warmup_steps = 0;
};

// Per flow: random warmup before T_s while collecting S/A/R, predictor
// pick and initialization copy at T_s, epsilon-greedy adaptation with
// inner updates after, travel time reported at T.
std::vector<MetaTestFlowResult> meta_test(const sim::Roadnet& net,
                                          const flow::FlowSet& flows,
                                          const ClusterBank& bank,
                                          const PredictorNet& pred,
                                          const MetaConfig& cfg,
                                          std::uint64_t run_seed);

}  // namespace tsclab::meta
