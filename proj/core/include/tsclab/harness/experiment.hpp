#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsclab/flowgen/wgan.hpp"
#include "tsclab/meta/generalight.hpp"
#include "tsclab/sim/roadnet.hpp"

namespace tsclab::harness {

struct TestSetSpec {
  std::string label;  // e.g. "D_0.01"
  std::string path;   // FlowSet directory
};

struct ExperimentConfig {
  // Roadnet: either a tsclab-v1 file or an inline grid.
  std::string roadnet_file;  // empty -> use grid
  int grid_rows = 1;
  int grid_cols = 1;
  sim::LaneParams lane;

  std::string train_flows;  // FlowSet directory
  std::vector<TestSetSpec> test_sets;
  std::vector<std::string> methods;  // fixed-time|random|dqn|dqn+maml|generalight
  std::vector<std::uint64_t> seeds;
  std::string out_dir;

  meta::MetaConfig meta;     // includes the DqnConfig block
  flowgen::WganConfig wgan;  // for `flowgen` runs driven by the same file
  int dqn_train_passes = 2;  // training-set passes for the plain DQN baseline
  bool record_traces = true;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

sim::Roadnet build_roadnet(const ExperimentConfig& cfg);

struct ResultRecord {
  std::string method;
  std::string label;  // test distribution
  std::uint64_t seed = 0;
  std::vector<double> flow_att;
  double att_max = 0.0;
  double att_min = 0.0;
  double att_mean = 0.0;
  double freeflow = 0.0;
  bool empty_flow_warning = false;
  std::string error;  // non-empty when this cell failed

  void finalize_stats();
};

// Trains every (method, seed) cell, evaluates every test FlowSet and writes
// results.csv plus per-episode trace/log CSVs under cfg.out_dir. A failing
// cell records its error and the run continues. Cells fan out over `jobs`
// worker threads; results are merged in deterministic order.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg,
                                         int jobs = 1);

void write_results_csv(const std::string& path,
                       const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results_csv(const std::string& path);

}  // namespace tsclab::harness
