// tsclab command-line front end: experiment runs, report generation, the
// WGAN flow generator and the meta-training/testing entry points.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tsclab/diffcore/serialize.hpp"
#include "tsclab/flow/io.hpp"
#include "tsclab/flowgen/wgan.hpp"
#include "tsclab/harness/experiment.hpp"
#include "tsclab/harness/plots.hpp"
#include "tsclab/harness/report.hpp"
#include "tsclab/meta/generalight.hpp"
#include "tsclab/sim/io.hpp"

namespace fs = std::filesystem;
using namespace tsclab;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::string cur;
  for (char ch : csv) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::stoull(cur));
  return out;
}

int cmd_run(const std::string& config_path, const std::string& seeds_csv,
            int jobs) {
  harness::ExperimentConfig cfg =
      harness::load_experiment_config(config_path);
  if (!seeds_csv.empty()) cfg.seeds = parse_seeds(seeds_csv);
  const auto records = harness::run_experiment(cfg, jobs);
  int failures = 0;
  for (const auto& r : records)
    if (!r.error.empty()) {
      ++failures;
      std::fprintf(stderr, "cell failed: %s %s seed=%llu: %s\n",
                   r.method.c_str(), r.label.c_str(),
                   static_cast<unsigned long long>(r.seed), r.error.c_str());
    }
  const harness::ReportTable table = harness::report_table(records);
  std::cout << table.formatted();
  harness::write_table_csv(
      (fs::path(cfg.out_dir) / "table.csv").string(), table);
  harness::emit_plots((fs::path(cfg.out_dir) / "trace").string(),
                      (fs::path(cfg.out_dir) / "plots").string());
  std::cout << "results written to " << cfg.out_dir << "\n";
  return failures ? 2 : 0;
}

int cmd_report(const std::string& in_dir) {
  const auto records =
      harness::read_results_csv((fs::path(in_dir) / "results.csv").string());
  const harness::ReportTable table = harness::report_table(records);
  std::cout << table.formatted();
  harness::write_table_csv((fs::path(in_dir) / "table.csv").string(), table);
  harness::emit_plots((fs::path(in_dir) / "trace").string(),
                      (fs::path(in_dir) / "plots").string());
  return 0;
}

int cmd_flowgen_train(const std::string& real_dir, double epsilon,
                      const std::string& out_params,
                      const std::string& config_path, std::uint64_t seed,
                      int iterations, int batch) {
  flowgen::WganConfig cfg;
  if (!config_path.empty())
    cfg = harness::load_experiment_config(config_path).wgan;
  cfg.epsilon = epsilon;
  cfg.seed = seed;
  if (iterations > 0) cfg.iterations = iterations;
  if (batch > 0) cfg.batch_size = batch;
  const flow::FlowSet real = flow::load_flow_set(real_dir);
  const flowgen::TrainResult result = flowgen::train_wgan(real, cfg);

  diffcore::ParamStore bundle = result.generator.params;
  bundle.put("meta.routes",
             diffcore::NumArray::scalar(result.generator.routes));
  bundle.put("meta.time_bins",
             diffcore::NumArray::scalar(result.generator.time_bins));
  bundle.put("meta.noise_dim",
             diffcore::NumArray::scalar(result.generator.noise_dim));
  bundle.put("meta.hidden",
             diffcore::NumArray::scalar(result.generator.hidden));
  bundle.put("meta.scale_cap", diffcore::NumArray::scalar(cfg.scale_cap));
  bundle.put("meta.epsilon", diffcore::NumArray::scalar(cfg.epsilon));
  bundle.put("meta.interval",
             diffcore::NumArray::scalar(real.members.front().interval));
  diffcore::save_params_file(out_params, bundle);

  std::ofstream trace(out_params + ".trace.csv");
  flowgen::write_trace_csv(trace, result.trace);
  std::printf("trained generator written to %s (%zu trace rows)\n",
              out_params.c_str(), result.trace.size());
  return 0;
}

int cmd_flowgen_sample(const std::string& params_path, int n,
                       std::uint64_t seed, const std::string& out_dir,
                       const std::string& real_dir) {
  diffcore::ParamStore bundle = diffcore::load_params_file(params_path);
  flowgen::GeneratorNet gen;
  gen.routes = static_cast<int>(bundle.at("meta.routes").data[0]);
  gen.time_bins = static_cast<int>(bundle.at("meta.time_bins").data[0]);
  gen.noise_dim = static_cast<int>(bundle.at("meta.noise_dim").data[0]);
  gen.hidden = static_cast<int>(bundle.at("meta.hidden").data[0]);
  const double cap = bundle.at("meta.scale_cap").data[0];
  const double eps = bundle.at("meta.epsilon").data[0];
  const int interval = static_cast<int>(bundle.at("meta.interval").data[0]);
  for (const char* key : {"fc1.w", "fc1.b", "fc2.w", "fc2.b"})
    gen.params.put(key, bundle.at(key));

  // Route metadata comes from the real set when available; otherwise
  // synthetic route ids are used.
  flow::FlowMatrix proto;
  if (!real_dir.empty()) {
    proto = flow::load_flow_set(real_dir).members.front();
  } else {
    std::vector<flow::Route> routes;
    for (int r = 0; r < gen.routes; ++r)
      routes.push_back({"r" + std::to_string(r), {}});
    proto = flow::FlowMatrix(routes, gen.time_bins, interval);
  }
  const flow::FlowSet out =
      flowgen::sample_flows(gen, proto, cap, eps, n, seed);
  flow::save_flow_set(out_dir, out);
  std::printf("%d generated flows written to %s\n", n, out_dir.c_str());
  return 0;
}

int cmd_meta_train(const std::string& config_path, const std::string& out_dir,
                   std::uint64_t seed, bool maml) {
  harness::ExperimentConfig cfg = harness::load_experiment_config(config_path);
  meta::MetaConfig mc = cfg.meta;
  mc.seed = seed;
  const sim::Roadnet net = harness::build_roadnet(cfg);
  const flow::FlowSet flows = flow::load_flow_set(cfg.train_flows);
  const meta::MetaTrainResult result =
      maml ? meta::maml_train(net, flows, mc) : meta::meta_train(net, flows, mc);
  meta::save_bank(out_dir, result.bank, result.predictor);
  std::printf("bank (%d clusters) written to %s\n", result.bank.clusters,
              out_dir.c_str());
  return 0;
}

int cmd_meta_test(const std::string& config_path, const std::string& bank_dir,
                  const std::string& flows_dir, std::uint64_t seed) {
  harness::ExperimentConfig cfg = harness::load_experiment_config(config_path);
  meta::MetaConfig mc = cfg.meta;
  const sim::Roadnet net = harness::build_roadnet(cfg);
  const flow::FlowSet flows = flow::load_flow_set(flows_dir);
  meta::LoadedBank loaded = meta::load_bank(bank_dir);
  mc.clusters = loaded.bank.clusters;
  const auto results =
      meta::meta_test(net, flows, loaded.bank, loaded.predictor, mc, seed);
  double mean = 0.0;
  std::printf("flow,att,freeflow,cluster\n");
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::printf("%zu,%.2f,%.2f,%d\n", i, results[i].att, results[i].freeflow,
                results[i].predicted_cluster);
    mean += results[i].att;
  }
  if (!results.empty())
    std::printf("mean att: %.2f over %zu flows\n", mean / results.size(),
                results.size());
  return 0;
}

int cmd_makegrid(int rows, int cols, const std::string& out_path,
                 double length, double speed, int x_max) {
  sim::LaneParams lane;
  lane.length = length;
  lane.free_speed = speed;
  lane.x_max = x_max;
  sim::save_roadnet(out_path, sim::build_grid(rows, cols, lane));
  std::printf("%dx%d grid written to %s\n", rows, cols, out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsclab: traffic-signal meta-RL laboratory"};
  app.require_subcommand(1);

  // run
  std::string run_config, run_seeds;
  int run_jobs = 1;
  CLI::App* run = app.add_subcommand("run", "run a config-driven experiment");
  run->add_option("--config", run_config, "experiment config file")->required();
  run->add_option("--seeds", run_seeds, "comma-separated seed override");
  run->add_option("--jobs", run_jobs, "worker threads over (method,seed)");

  // report
  std::string report_in;
  CLI::App* report = app.add_subcommand("report", "re-render a results dir");
  report->add_option("--in", report_in, "results directory")->required();

  // flowgen train/sample
  CLI::App* fg = app.add_subcommand("flowgen", "WGAN traffic-flow generator");
  fg->require_subcommand(1);
  std::string fg_real, fg_out, fg_config;
  double fg_eps = 0.0;
  std::uint64_t fg_seed = 0;
  int fg_iters = 0;
  int fg_batch = 0;
  CLI::App* fg_train = fg->add_subcommand("train", "train a generator");
  fg_train->add_option("--real", fg_real, "real FlowSet directory")->required();
  fg_train->add_option("--epsilon", fg_eps, "target W-distance")->required();
  fg_train->add_option("--out", fg_out, "output params file")->required();
  fg_train->add_option("--config", fg_config, "experiment config with wgan block");
  fg_train->add_option("--seed", fg_seed, "training seed");
  fg_train->add_option("--iterations", fg_iters, "generator steps override");
  fg_train->add_option("--batch", fg_batch, "batch size override");

  std::string fs_params, fs_out, fs_real;
  int fs_n = 16;
  std::uint64_t fs_seed = 0;
  CLI::App* fg_sample = fg->add_subcommand("sample", "sample generated flows");
  fg_sample->add_option("--params", fs_params, "generator params file")->required();
  fg_sample->add_option("--n", fs_n, "number of flows")->required();
  fg_sample->add_option("--seed", fs_seed, "sampling seed");
  fg_sample->add_option("--out", fs_out, "output FlowSet directory")->required();
  fg_sample->add_option("--real", fs_real, "real FlowSet for route metadata");

  // meta train/test
  CLI::App* mt = app.add_subcommand("meta", "GeneraLight training and testing");
  mt->require_subcommand(1);
  std::string mt_config, mt_out;
  std::uint64_t mt_seed = 0;
  bool mt_maml = false;
  CLI::App* mt_train = mt->add_subcommand("train", "meta-train a cluster bank");
  mt_train->add_option("--config", mt_config, "experiment config")->required();
  mt_train->add_option("--out", mt_out, "bank output directory")->required();
  mt_train->add_option("--seed", mt_seed, "training seed");
  mt_train->add_flag("--maml", mt_maml, "single-cluster MAML baseline");

  std::string tt_config, tt_bank, tt_flows;
  std::uint64_t tt_seed = 0;
  CLI::App* mt_test = mt->add_subcommand("test", "meta-test a trained bank");
  mt_test->add_option("--config", tt_config, "experiment config")->required();
  mt_test->add_option("--bank", tt_bank, "bank directory")->required();
  mt_test->add_option("--flows", tt_flows, "test FlowSet directory")->required();
  mt_test->add_option("--seed", tt_seed, "test seed");

  // makegrid
  int mg_rows = 1, mg_cols = 1, mg_xmax = 20;
  double mg_len = 300.0, mg_speed = 10.0;
  std::string mg_out;
  CLI::App* mg = app.add_subcommand("makegrid", "write a grid roadnet file");
  mg->add_option("--rows", mg_rows)->required();
  mg->add_option("--cols", mg_cols)->required();
  mg->add_option("--out", mg_out)->required();
  mg->add_option("--length", mg_len, "lane length, m");
  mg->add_option("--speed", mg_speed, "free speed, m/s");
  mg->add_option("--x-max", mg_xmax, "lane capacity");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_seeds, run_jobs);
    if (report->parsed()) return cmd_report(report_in);
    if (fg->parsed() && fg_train->parsed())
      return cmd_flowgen_train(fg_real, fg_eps, fg_out, fg_config, fg_seed,
                               fg_iters, fg_batch);
    if (fg->parsed() && fg_sample->parsed())
      return cmd_flowgen_sample(fs_params, fs_n, fs_seed, fs_out, fs_real);
    if (mt->parsed() && mt_train->parsed())
      return cmd_meta_train(mt_config, mt_out, mt_seed, mt_maml);
    if (mt->parsed() && mt_test->parsed())
      return cmd_meta_test(tt_config, tt_bank, tt_flows, tt_seed);
    if (mg->parsed())
      return cmd_makegrid(mg_rows, mg_cols, mg_out, mg_len, mg_speed, mg_xmax);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
