#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsclab/agent/dqn.hpp"
#include "tsclab/agent/replay.hpp"
#include "tsclab/diffcore/param_store.hpp"
#include "tsclab/meta/features.hpp"

namespace tsclab::meta {

using diffcore::ParamStore;

// Per-cluster global parameter initializations plus the flow-cluster
// mapping, the cluster centroids in normalized feature space, and the
// per-cluster query memories fed by post-adaptation rollouts.
struct ClusterBank {
  int clusters = 0;
  // theta0[cluster][intersection]
  std::vector<std::vector<ParamStore>> theta0;
  std::vector<int> mapping;  // C_m: flow index -> cluster
  std::vector<std::vector<double>> centroids;
  FeatureNorm norm;
  // query_memories[cluster][intersection]; runtime state, not checkpointed.
  std::vector<std::vector<agent::ReplayMemory>> query_memories;
};

// Dense predictor from the SAR sub-feature to C_n class scores.
struct PredictorNet {
  int input_dim = 0;
  int clusters = 0;
  ParamStore params;  // fc1.{w,b}, out.{w,b}

  static PredictorNet init(int input_dim, int hidden, int clusters, Rng& rng);

  std::vector<double> scores(std::span<const double> sar) const;
};

// argmax class score, lowest-index tie-break.
int predict_cluster(const PredictorNet& pred, std::span<const double> sar);

// Summed softmax cross-entropy over all flows with labels mapping[i].
double predictor_loss(const PredictorNet& pred,
                      const std::vector<std::vector<double>>& sar_features,
                      const std::vector<int>& labels);

// One gradient step at rate eta on the summed cross-entropy.
void predictor_update(PredictorNet& pred,
                      const std::vector<std::vector<double>>& sar_features,
                      const std::vector<int>& labels, double eta);

// First-order outer step for cluster j: the DQN-loss gradient is evaluated
// at `eval_params` (the round's adapted parameters) on a seeded batch from
// the cluster's query memory and applied to theta0[j]. TD targets come from
// `target_params` (a lagged copy of the initialization). No-op (false)
// while a query memory is smaller than the batch size.
bool global_update(ClusterBank& bank, int cluster,
                   const std::vector<ParamStore>& eval_params,
                   const std::vector<ParamStore>& target_params,
                   const agent::DqnConfig& dqn, double beta, Rng& rng);

// Elementwise parameter arithmetic used for the outer evaluation point.
void add_params_inplace(ParamStore& acc, const ParamStore& other);
void scale_params_inplace(ParamStore& acc, double s);

// Bank checkpoint: a directory of ParamStore files, a C_m manifest and a
// centroid/normalization file, plus the predictor parameters.
void save_bank(const std::string& dir, const ClusterBank& bank,
               const PredictorNet& pred);
struct LoadedBank {
  ClusterBank bank;
  PredictorNet predictor;
};
LoadedBank load_bank(const std::string& dir);

}  // namespace tsclab::meta
