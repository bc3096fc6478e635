#include "tsclab/meta/bank.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tsclab/diffcore/kernels.hpp"
#include "tsclab/diffcore/optim.hpp"
#include "tsclab/diffcore/serialize.hpp"
#include "tsclab/diffcore/tape.hpp"

namespace tsclab::meta {

namespace fs = std::filesystem;
using diffcore::Tape;
using nlohmann::json;

PredictorNet PredictorNet::init(int input_dim, int hidden, int clusters,
                                Rng& rng) {
  if (clusters < 1)
    throw std::invalid_argument("PredictorNet: clusters must be >= 1");
  PredictorNet p;
  p.input_dim = input_dim;
  p.clusters = clusters;
  // hidden == 0: plain linear class scores.
  if (hidden > 0)
    diffcore::init_dense_layer(p.params, "fc1", input_dim, hidden, rng);
  diffcore::init_dense_layer(p.params, "out", hidden > 0 ? hidden : input_dim,
                             clusters, rng);
  return p;
}

std::vector<double> PredictorNet::scores(std::span<const double> sar) const {
  if (!params.has("fc1.w")) return diffcore::dense_forward(params, "out", sar);
  std::vector<double> h = diffcore::dense_forward(params, "fc1", sar);
  diffcore::relu_inplace(h);
  return diffcore::dense_forward(params, "out", h);
}

int predict_cluster(const PredictorNet& pred, std::span<const double> sar) {
  const std::vector<double> s = pred.scores(sar);
  int best = 0;
  for (std::size_t j = 1; j < s.size(); ++j)
    if (s[j] > s[best]) best = static_cast<int>(j);
  return best;
}

namespace {

Tape::VarId predictor_graph(Tape& tape,
                            const std::map<std::string, Tape::VarId>& pv,
                            Tape::VarId x) {
  if (pv.count("fc1.w") == 0)
    return tape.dense(pv.at("out.w"), pv.at("out.b"), x);
  Tape::VarId h = tape.relu(tape.dense(pv.at("fc1.w"), pv.at("fc1.b"), x));
  return tape.dense(pv.at("out.w"), pv.at("out.b"), h);
}

Tape::VarId predictor_loss_graph(
    Tape& tape, const std::map<std::string, Tape::VarId>& pv,
    const std::vector<std::vector<double>>& sar_features,
    const std::vector<int>& labels) {
  std::vector<Tape::VarId> terms;
  terms.reserve(sar_features.size());
  for (std::size_t i = 0; i < sar_features.size(); ++i) {
    Tape::VarId scores = predictor_graph(
        tape, pv, tape.input(diffcore::NumArray::vec(sar_features[i])));
    Tape::VarId ce =
        tape.sub(tape.logsumexp(scores),
                 tape.pick(scores, static_cast<std::size_t>(labels[i])));
    terms.push_back(ce);
  }
  return tape.sum_of(terms);
}

}  // namespace

double predictor_loss(const PredictorNet& pred,
                      const std::vector<std::vector<double>>& sar_features,
                      const std::vector<int>& labels) {
  if (sar_features.size() != labels.size() || sar_features.empty())
    throw std::invalid_argument("predictor_loss: bad inputs");
  Tape tape;
  auto pv = tape.params(pred.params);
  return tape.value(predictor_loss_graph(tape, pv, sar_features, labels))
      .data[0];
}

void predictor_update(PredictorNet& pred,
                      const std::vector<std::vector<double>>& sar_features,
                      const std::vector<int>& labels, double eta) {
  if (sar_features.size() != labels.size() || sar_features.empty())
    throw std::invalid_argument("predictor_update: bad inputs");
  for (int label : labels)
    if (label < 0 || label >= pred.clusters)
      throw std::invalid_argument("predictor_update: label out of range");
  if (eta == 0.0) return;
  Tape tape;
  auto pv = tape.params(pred.params);
  Tape::VarId loss = predictor_loss_graph(tape, pv, sar_features, labels);
  tape.backward(loss);
  diffcore::plain_gradient_step(pred.params, tape.param_grads(), eta);
}

bool global_update(ClusterBank& bank, int cluster,
                   const std::vector<ParamStore>& eval_params,
                   const std::vector<ParamStore>& target_params,
                   const agent::DqnConfig& dqn, double beta, Rng& rng) {
  if (cluster < 0 || cluster >= bank.clusters)
    throw std::invalid_argument("global_update: cluster out of range");
  if (beta == 0.0) return true;
  bool any = false;
  for (std::size_t k = 0; k < bank.theta0[cluster].size(); ++k) {
    agent::ReplayMemory& mem = bank.query_memories[cluster][k];
    if (mem.size() < static_cast<std::size_t>(dqn.batch_size)) continue;
    const auto batch = mem.sample(dqn.batch_size, rng);
    // First-order step: gradient at the adapted parameters, applied to the
    // cluster initialization.
    const diffcore::Grads grads = agent::dqn_loss_grads(
        eval_params[k], target_params[k], batch, dqn.gamma);
    diffcore::plain_gradient_step(bank.theta0[cluster][k], grads, beta);
    any = true;
  }
  return any;
}

void add_params_inplace(ParamStore& acc, const ParamStore& other) {
  for (auto& [key, arr] : acc.entries) {
    const diffcore::NumArray& o = other.at(key);
    if (o.shape != arr.shape)
      throw std::invalid_argument("add_params_inplace: shape mismatch");
    for (std::size_t i = 0; i < arr.size(); ++i) arr.data[i] += o.data[i];
  }
}

void scale_params_inplace(ParamStore& acc, double s) {
  for (auto& [key, arr] : acc.entries)
    for (double& v : arr.data) v *= s;
}

void save_bank(const std::string& dir, const ClusterBank& bank,
               const PredictorNet& pred) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = "tsclab-v1";
  manifest["clusters"] = bank.clusters;
  manifest["intersections"] =
      bank.theta0.empty() ? 0 : static_cast<int>(bank.theta0.front().size());
  manifest["mapping"] = bank.mapping;
  manifest["centroids"] = bank.centroids;
  manifest["norm_mean"] = bank.norm.mean;
  manifest["norm_std"] = bank.norm.stddev;
  manifest["predictor_input_dim"] = pred.input_dim;
  std::ofstream f(fs::path(dir) / "bank.json");
  if (!f) throw std::runtime_error("cannot write bank manifest in " + dir);
  f << manifest.dump(2) << "\n";

  for (int j = 0; j < bank.clusters; ++j)
    for (std::size_t k = 0; k < bank.theta0[j].size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "cluster%d_agent%zu.params", j, k);
      diffcore::save_params_file((fs::path(dir) / name).string(),
                                 bank.theta0[j][k]);
    }
  diffcore::save_params_file((fs::path(dir) / "predictor.params").string(),
                             pred.params);
}

LoadedBank load_bank(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "bank.json");
  if (!f) throw std::runtime_error("missing bank.json in " + dir);
  json manifest;
  f >> manifest;
  LoadedBank out;
  out.bank.clusters = manifest.at("clusters").get<int>();
  const int n_inter = manifest.at("intersections").get<int>();
  out.bank.mapping = manifest.at("mapping").get<std::vector<int>>();
  out.bank.centroids =
      manifest.at("centroids").get<std::vector<std::vector<double>>>();
  out.bank.norm.mean = manifest.at("norm_mean").get<std::vector<double>>();
  out.bank.norm.stddev = manifest.at("norm_std").get<std::vector<double>>();
  out.bank.theta0.resize(out.bank.clusters);
  for (int j = 0; j < out.bank.clusters; ++j)
    for (int k = 0; k < n_inter; ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "cluster%d_agent%d.params", j, k);
      out.bank.theta0[j].push_back(
          diffcore::load_params_file((fs::path(dir) / name).string()));
    }
  out.predictor.params =
      diffcore::load_params_file((fs::path(dir) / "predictor.params").string());
  out.predictor.clusters = out.bank.clusters;
  out.predictor.input_dim = manifest.at("predictor_input_dim").get<int>();
  return out;
}

}  // namespace tsclab::meta
