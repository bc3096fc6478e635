#include "tsclab/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tsclab/agent/episode.hpp"
#include "tsclab/flow/io.hpp"
#include "tsclab/harness/plots.hpp"
#include "tsclab/sim/io.hpp"

namespace tsclab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
  if (methods.empty())
    throw std::invalid_argument("ExperimentConfig: no methods");
  if (seeds.empty()) throw std::invalid_argument("ExperimentConfig: no seeds");
  for (const std::string& m : methods)
    if (m != "fixed-time" && m != "random" && m != "dqn" && m != "dqn+maml" &&
        m != "generalight")
      throw std::invalid_argument("ExperimentConfig: unknown method '" + m +
                                  "'");
  std::vector<std::string> labels;
  for (const TestSetSpec& t : test_sets) labels.push_back(t.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw std::invalid_argument("ExperimentConfig: duplicate test labels");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  json j;
  f >> j;
  if (j.value("version", "") != "tsclab-v1")
    throw std::runtime_error(path + ": expected version tsclab-v1");

  ExperimentConfig cfg;
  const json& rn = j.at("roadnet");
  if (rn.contains("file")) {
    cfg.roadnet_file = rn.at("file").get<std::string>();
  } else {
    const json& grid = rn.at("grid");
    cfg.grid_rows = grid.at("rows").get<int>();
    cfg.grid_cols = grid.at("cols").get<int>();
    if (rn.contains("lane")) {
      const json& lane = rn.at("lane");
      cfg.lane.length = lane.value("length", cfg.lane.length);
      cfg.lane.free_speed = lane.value("speed", cfg.lane.free_speed);
      cfg.lane.x_max = lane.value("x_max", cfg.lane.x_max);
    }
  }
  cfg.train_flows = j.at("train_flows").get<std::string>();
  for (const json& t : j.value("test_flowsets", json::array()))
    cfg.test_sets.push_back(TestSetSpec{t.at("label").get<std::string>(),
                                        t.at("path").get<std::string>()});
  cfg.methods = j.at("methods").get<std::vector<std::string>>();
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.out_dir = j.value("out_dir", "results");
  cfg.dqn_train_passes = j.value("dqn_train_passes", cfg.dqn_train_passes);
  cfg.record_traces = j.value("record_traces", cfg.record_traces);

  if (j.contains("meta")) {
    const json& m = j["meta"];
    meta::MetaConfig& mc = cfg.meta;
    mc.clusters = m.value("clusters", mc.clusters);
    mc.recluster_period = m.value("recluster_period", mc.recluster_period);
    mc.episode_seconds = m.value("episode_seconds", mc.episode_seconds);
    mc.learn_start_seconds =
        m.value("learn_start_seconds", mc.learn_start_seconds);
    mc.outer_lr = m.value("outer_lr", mc.outer_lr);
    mc.predictor_lr = m.value("predictor_lr", mc.predictor_lr);
    mc.predictor_steps = m.value("predictor_steps", mc.predictor_steps);
    mc.predictor_hidden = m.value("predictor_hidden", mc.predictor_hidden);
    mc.rounds = m.value("rounds", mc.rounds);
    mc.decision_interval = m.value("decision_interval", mc.decision_interval);
    mc.query_memory_budget =
        m.value("query_memory_budget", mc.query_memory_budget);
  }
  if (j.contains("dqn")) {
    const json& d = j["dqn"];
    agent::DqnConfig& dc = cfg.meta.dqn;
    dc.gamma = d.value("gamma", dc.gamma);
    dc.alpha = d.value("alpha", dc.alpha);
    dc.batch_size = d.value("batch_size", dc.batch_size);
    dc.target_sync_period = d.value("target_sync_period", dc.target_sync_period);
    dc.eps_start = d.value("eps_start", dc.eps_start);
    dc.eps_end = d.value("eps_end", dc.eps_end);
    dc.eps_decay_steps = d.value("eps_decay_steps", dc.eps_decay_steps);
    dc.update_cadence = d.value("update_cadence", dc.update_cadence);
    dc.capacity = d.value("capacity", dc.capacity);
    dc.hidden = d.value("hidden", dc.hidden);
  }
  if (j.contains("wgan")) {
    const json& w = j["wgan"];
    flowgen::WganConfig& wc = cfg.wgan;
    wc.epsilon = w.value("epsilon", wc.epsilon);
    wc.k1 = w.value("k1", wc.k1);
    wc.k2 = w.value("k2", wc.k2);
    wc.clip = w.value("clip", wc.clip);
    wc.n_critic = w.value("n_critic", wc.n_critic);
    wc.lr = w.value("lr", wc.lr);
    wc.iterations = w.value("iterations", wc.iterations);
    wc.batch_size = w.value("batch_size", wc.batch_size);
    wc.scale_cap = w.value("scale_cap", wc.scale_cap);
  }
  cfg.validate();
  return cfg;
}

sim::Roadnet build_roadnet(const ExperimentConfig& cfg) {
  if (!cfg.roadnet_file.empty()) return sim::load_roadnet(cfg.roadnet_file);
  return sim::build_grid(cfg.grid_rows, cfg.grid_cols, cfg.lane);
}

void ResultRecord::finalize_stats() {
  if (flow_att.empty()) {
    att_max = att_min = att_mean = 0.0;
    return;
  }
  att_max = *std::max_element(flow_att.begin(), flow_att.end());
  att_min = *std::min_element(flow_att.begin(), flow_att.end());
  double sum = 0.0;
  for (double v : flow_att) sum += v;
  att_mean = sum / static_cast<double>(flow_att.size());
}

namespace {

constexpr std::uint64_t kSaltEvalVehicles = 0xc1;
constexpr std::uint64_t kSaltEvalEpisode = 0xc2;
constexpr std::uint64_t kSaltDqnTrain = 0xc3;

struct EvalOutcome {
  double att = 0.0;
  bool empty_flow = false;
  std::vector<agent::TickSample> series;
  std::vector<agent::DecisionLog> decisions;
};

std::string cell_file_tag(const std::string& method, const std::string& label,
                          std::uint64_t seed, std::size_t flow_idx) {
  std::string m = method;
  std::replace(m.begin(), m.end(), '+', '_');
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_seed%llu_flow%03zu", m.c_str(),
                label.c_str(), static_cast<unsigned long long>(seed),
                flow_idx);
  return buf;
}

void write_cell_outputs(const ExperimentConfig& cfg, const std::string& method,
                        const std::string& label, std::uint64_t seed,
                        std::size_t flow_idx, const EvalOutcome& out) {
  if (!cfg.record_traces) return;
  const std::string tag = cell_file_tag(method, label, seed, flow_idx);
  write_series_csv((fs::path(cfg.out_dir) / "trace" / (tag + ".csv")).string(),
                   out.series);
  write_decision_csv(
      (fs::path(cfg.out_dir) / "logs" / (tag + ".csv")).string(),
      out.decisions);
}

// Evaluation run for the non-adaptive methods.
EvalOutcome evaluate_policy(
    const sim::Roadnet& net, const std::vector<sim::VehicleSpec>& vehicles,
    const meta::MetaConfig& mc, bool record,
    const std::function<int(int, const std::vector<double>&, long)>& act) {
  sim::SimWorld world(net, vehicles);
  agent::EpisodeHooks hooks;
  hooks.act = act;
  hooks.record_series = record;
  hooks.record_decisions = record;
  agent::EpisodeOutcome ep = agent::run_episode(
      world, mc.episode_seconds, mc.decision_interval, hooks);
  EvalOutcome out;
  out.att = ep.att;
  out.empty_flow = ep.empty_flow;
  out.series = std::move(ep.series);
  out.decisions = std::move(ep.decision_log);
  return out;
}

// Plain DQN baseline: one net per intersection trained over the training
// flows with a memory shared across environments, then evaluated greedily.
std::vector<agent::QNet> train_plain_dqn(const sim::Roadnet& net,
                                         const flow::FlowSet& train,
                                         const ExperimentConfig& cfg,
                                         std::uint64_t seed) {
  const int n_inter = static_cast<int>(net.intersections.size());
  const agent::DqnConfig& dc = cfg.meta.dqn;
  Rng init_rng(derive_seed(seed, kSaltDqnTrain));
  std::vector<agent::QNet> nets;
  for (int k = 0; k < n_inter; ++k)
    nets.push_back(
        agent::QNet::init(agent::state_dim(net, k), dc.hidden, init_rng));
  std::vector<agent::ReplayMemory> memory(n_inter,
                                          agent::ReplayMemory(dc.capacity));
  long decision_counter = 0;
  for (int pass = 0; pass < cfg.dqn_train_passes; ++pass) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      Rng veh_rng(derive_seed(derive_seed(seed, kSaltDqnTrain + 1),
                              pass * 1000 + i));
      const auto vehicles = flow::matrix_to_vehicles(train.members[i], veh_rng);
      Rng ep_rng(derive_seed(derive_seed(seed, kSaltDqnTrain + 2),
                             pass * 1000 + i));
      sim::SimWorld world(net, vehicles);
      agent::EpisodeHooks hooks;
      const long base = decision_counter;
      hooks.act = [&](int k, const std::vector<double>& s, long d) {
        return agent::select_action(nets[k].q_forward(s),
                                    dc.epsilon_at(base + d), ep_rng);
      };
      hooks.on_transition = [&](int k, const agent::Transition& t) {
        memory[k].push(t);
        agent::local_update(nets[k], memory[k], dc, dc.update_cadence, ep_rng);
      };
      const auto ep = agent::run_episode(world, cfg.meta.episode_seconds,
                                         cfg.meta.decision_interval, hooks);
      decision_counter += ep.decisions;
    }
  }
  return nets;
}

std::vector<ResultRecord> run_cell(const ExperimentConfig& cfg,
                                   const sim::Roadnet& net,
                                   const flow::FlowSet& train,
                                   const std::vector<flow::FlowSet>& tests,
                                   const std::string& method,
                                   std::uint64_t seed) {
  // Train once per cell.
  std::vector<agent::QNet> dqn_nets;
  meta::MetaTrainResult meta_model;
  if (method == "dqn") {
    dqn_nets = train_plain_dqn(net, train, cfg, seed);
  } else if (method == "dqn+maml" || method == "generalight") {
    meta::MetaConfig mc = cfg.meta;
    mc.seed = seed;
    meta_model = method == "generalight" ? meta::meta_train(net, train, mc)
                                         : meta::maml_train(net, train, mc);
  }

  std::vector<ResultRecord> records;
  for (std::size_t ts = 0; ts < tests.size(); ++ts) {
    const flow::FlowSet& test_set = tests[ts];
    ResultRecord rec;
    rec.method = method;
    rec.label = cfg.test_sets[ts].label;
    rec.seed = seed;

    if (method == "dqn+maml" || method == "generalight") {
      meta::MetaConfig mc = cfg.meta;
      mc.seed = seed;
      mc.clusters = meta_model.bank.clusters;
      const auto results =
          meta::meta_test(net, test_set, meta_model.bank,
                          meta_model.predictor, mc, derive_seed(seed, ts));
      double ff = 0.0;
      for (const meta::MetaTestFlowResult& r : results) {
        rec.flow_att.push_back(r.att);
        ff += r.freeflow;
      }
      rec.freeflow = results.empty() ? 0.0 : ff / results.size();
    } else {
      double ff = 0.0;
      for (std::size_t i = 0; i < test_set.size(); ++i) {
        Rng veh_rng(derive_seed(derive_seed(seed, kSaltEvalVehicles),
                                ts * 1000 + i));
        const auto vehicles =
            flow::matrix_to_vehicles(test_set.members[i], veh_rng);
        ff += sim::free_flow_time(net, vehicles);
        Rng act_rng(derive_seed(derive_seed(seed, kSaltEvalEpisode),
                                ts * 1000 + i));
        EvalOutcome out;
        if (method == "fixed-time") {
          // Cycle through the 8 phases, one decision interval each.
          out = evaluate_policy(
              net, vehicles, cfg.meta, cfg.record_traces,
              [](int, const std::vector<double>&, long d) {
                return static_cast<int>(d % agent::kActionCount);
              });
        } else if (method == "random") {
          out = evaluate_policy(
              net, vehicles, cfg.meta, cfg.record_traces,
              [&](int, const std::vector<double>&, long) {
                return static_cast<int>(
                    act_rng.uniform_int(agent::kActionCount));
              });
        } else {  // dqn, greedy and frozen
          out = evaluate_policy(
              net, vehicles, cfg.meta, cfg.record_traces,
              [&](int k, const std::vector<double>& s, long) {
                return agent::select_action(dqn_nets[k].q_forward(s), 0.0,
                                            act_rng);
              });
        }
        rec.flow_att.push_back(out.att);
        rec.empty_flow_warning = rec.empty_flow_warning || out.empty_flow;
        write_cell_outputs(cfg, method, rec.label, seed, i, out);
      }
      rec.freeflow = test_set.size() ? ff / test_set.size() : 0.0;
    }
    rec.finalize_stats();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg,
                                         int jobs) {
  cfg.validate();
  if (jobs < 1) jobs = 1;
  const sim::Roadnet net = build_roadnet(cfg);
  const flow::FlowSet train = flow::load_flow_set(cfg.train_flows);
  std::vector<flow::FlowSet> tests;
  for (const TestSetSpec& t : cfg.test_sets)
    tests.push_back(flow::load_flow_set(t.path));

  fs::create_directories(cfg.out_dir);
  if (cfg.record_traces) {
    fs::create_directories(fs::path(cfg.out_dir) / "trace");
    fs::create_directories(fs::path(cfg.out_dir) / "logs");
  }

  struct Cell {
    std::string method;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const std::string& m : cfg.methods)
    for (std::uint64_t s : cfg.seeds) cells.push_back(Cell{m, s});

  std::vector<std::vector<ResultRecord>> cell_records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cells.size()) return;
      try {
        cell_records[c] =
            run_cell(cfg, net, train, tests, cells[c].method, cells[c].seed);
      } catch (const std::exception& e) {
        // Record the failure for every label of this cell; keep going.
        for (const TestSetSpec& t : cfg.test_sets) {
          ResultRecord rec;
          rec.method = cells[c].method;
          rec.label = t.label;
          rec.seed = cells[c].seed;
          rec.error = e.what();
          cell_records[c].push_back(std::move(rec));
        }
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<ResultRecord> records;  // deterministic (method, seed) order
  for (auto& cr : cell_records)
    for (ResultRecord& r : cr) records.push_back(std::move(r));
  write_results_csv((fs::path(cfg.out_dir) / "results.csv").string(), records);
  return records;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_results_csv(const std::string& path,
                       const std::vector<ResultRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "method,label,seed,att_max,att_min,att_mean,freeflow,empty_flow,error,"
       "flow_att\n";
  for (const ResultRecord& r : records) {
    f << r.method << ',' << r.label << ',' << r.seed << ','
      << fmt17(r.att_max) << ',' << fmt17(r.att_min) << ','
      << fmt17(r.att_mean) << ',' << fmt17(r.freeflow) << ','
      << (r.empty_flow_warning ? 1 : 0) << ',' << r.error << ',';
    for (std::size_t i = 0; i < r.flow_att.size(); ++i) {
      if (i) f << ';';
      f << fmt17(r.flow_att[i]);
    }
    f << '\n';
  }
}

std::vector<ResultRecord> read_results_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error(path + ": empty results csv");
  std::vector<ResultRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != 10)
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    ResultRecord r;
    r.method = fields[0];
    r.label = fields[1];
    r.seed = std::stoull(fields[2]);
    r.att_max = std::stod(fields[3]);
    r.att_min = std::stod(fields[4]);
    r.att_mean = std::stod(fields[5]);
    r.freeflow = std::stod(fields[6]);
    r.empty_flow_warning = fields[7] == "1";
    r.error = fields[8];
    if (!fields[9].empty()) {
      std::istringstream ss(fields[9]);
      std::string tok;
      while (std::getline(ss, tok, ';')) r.flow_att.push_back(std::stod(tok));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tsclab::harness
