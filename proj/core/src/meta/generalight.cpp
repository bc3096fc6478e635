#include "tsclab/meta/generalight.hpp"

#include <algorithm>
#include <stdexcept>

#include "tsclab/agent/episode.hpp"
#include "tsclab/meta/kmeans.hpp"

namespace tsclab::meta {

namespace {

// Seed-stream salts; every consumer owns an isolated stream so optional
// stages (predictor, kmeans) cannot perturb the bank trajectory.
constexpr std::uint64_t kSaltBank = 0xb1;
constexpr std::uint64_t kSaltMapping = 0xb2;
constexpr std::uint64_t kSaltPredictor = 0xb3;
constexpr std::uint64_t kSaltVehicles = 0xb4;
constexpr std::uint64_t kSaltEpisode = 0xb5;
constexpr std::uint64_t kSaltOuter = 0xb6;
constexpr std::uint64_t kSaltKmeans = 0xb7;
constexpr std::uint64_t kSaltTestVehicles = 0xb8;
constexpr std::uint64_t kSaltTestEpisode = 0xb9;

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt, std::uint64_t a,
                  std::uint64_t b = 0) {
  return derive_seed(derive_seed(derive_seed(seed, salt), a), b);
}

struct AgentSet {
  std::vector<agent::QNet> nets;

  static AgentSet from_theta(const std::vector<ParamStore>& theta) {
    AgentSet s;
    s.nets.resize(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
      s.nets[k].online = theta[k];
      s.nets[k].target = theta[k];
    }
    return s;
  }
};

}  // namespace

void MetaConfig::validate() const {
  if (clusters < 1) throw std::invalid_argument("MetaConfig: C_n >= 1");
  if (recluster_period < 1) throw std::invalid_argument("MetaConfig: C_u >= 1");
  if (episode_seconds < 1) throw std::invalid_argument("MetaConfig: T >= 1");
  if (learn_start_seconds <= 0 || learn_start_seconds >= episode_seconds)
    throw std::invalid_argument("MetaConfig: 0 < T_s < T");
  if (rounds < 0) throw std::invalid_argument("MetaConfig: rounds >= 0");
  if (decision_interval < 1)
    throw std::invalid_argument("MetaConfig: decision_interval >= 1");
  dqn.validate();
}

MetaTrainResult meta_train(const sim::Roadnet& net, const flow::FlowSet& flows,
                           const MetaConfig& cfg) {
  cfg.validate();
  flows.validate();
  const int n_flows = static_cast<int>(flows.size());
  if (n_flows < cfg.clusters)
    throw std::invalid_argument("meta_train: need at least C_n flows");
  const int n_inter = static_cast<int>(net.intersections.size());

  const int sdim = agent::state_dim(net, 0);
  for (int k = 1; k < n_inter; ++k)
    if (agent::state_dim(net, k) != sdim)
      throw std::invalid_argument(
          "meta_train: intersections must share the state dimension");
  const int sar_dim = 2 * sdim + 8 + 1;

  MetaTrainResult res;
  res.bank.clusters = cfg.clusters;
  {
    Rng bank_rng(derive_seed(cfg.seed, kSaltBank));
    res.bank.theta0.resize(cfg.clusters);
    for (int j = 0; j < cfg.clusters; ++j)
      for (int k = 0; k < n_inter; ++k)
        res.bank.theta0[j].push_back(
            agent::init_qnet_params(sdim, cfg.dqn.hidden, bank_rng));
  }
  {
    Rng cm_rng(derive_seed(cfg.seed, kSaltMapping));
    res.bank.mapping.resize(n_flows);
    for (int i = 0; i < n_flows; ++i)
      res.bank.mapping[i] =
          static_cast<int>(cm_rng.uniform_int(cfg.clusters));
  }
  {
    Rng pred_rng(derive_seed(cfg.seed, kSaltPredictor));
    res.predictor = PredictorNet::init(sar_dim, cfg.predictor_hidden,
                                       cfg.clusters, pred_rng);
  }
  const std::size_t query_cap = std::max<std::size_t>(
      cfg.dqn.batch_size, cfg.query_memory_budget / cfg.clusters);
  res.bank.query_memories.assign(
      cfg.clusters,
      std::vector<agent::ReplayMemory>(n_inter,
                                       agent::ReplayMemory(query_cap)));

  // Vehicles materialized once per flow: each round revisits the same
  // environment, as with a fixed dataset.
  std::vector<std::vector<sim::VehicleSpec>> vehicles(n_flows);
  for (int i = 0; i < n_flows; ++i) {
    Rng veh_rng(mix(cfg.seed, kSaltVehicles, static_cast<std::uint64_t>(i)));
    vehicles[i] = flow::matrix_to_vehicles(flows.members[i], veh_rng);
  }

  std::vector<std::vector<agent::ReplayMemory>> memories(
      n_flows,
      std::vector<agent::ReplayMemory>(n_inter,
                                       agent::ReplayMemory(cfg.dqn.capacity)));
  std::vector<FeatureCollector> collectors(n_flows);
  long decision_counter = 0;  // drives the epsilon schedule across rounds

  for (int round = 0; round < cfg.rounds; ++round) {
    std::vector<std::vector<ParamStore>> adapted_sum(cfg.clusters);
    std::vector<int> adapted_count(cfg.clusters, 0);

    for (int i = 0; i < n_flows; ++i) {
      const int j = res.bank.mapping[i];
      AgentSet agents = AgentSet::from_theta(res.bank.theta0[j]);
      Rng ep_rng(mix(cfg.seed, kSaltEpisode, static_cast<std::uint64_t>(round),
                     static_cast<std::uint64_t>(i)));

      // Adaptation episode: transitions to M_i, inner updates at the agent
      // cadence.
      {
        sim::SimWorld world(net, vehicles[i]);
        agent::EpisodeHooks hooks;
        const long base_decision = decision_counter;
        hooks.act = [&](int k, const std::vector<double>& s, long d) {
          const double eps = cfg.dqn.epsilon_at(base_decision + d);
          return agent::select_action(agents.nets[k].q_forward(s), eps,
                                      ep_rng);
        };
        hooks.on_transition = [&](int k, const agent::Transition& t) {
          memories[i][k].push(t);
          agent::local_update(agents.nets[k], memories[i][k], cfg.dqn,
                              cfg.dqn.update_cadence, ep_rng);
        };
        const agent::EpisodeOutcome outcome = agent::run_episode(
            world, cfg.episode_seconds, cfg.decision_interval, hooks);
        decision_counter += outcome.decisions;
      }

      // Post-adaptation rollout, shaped like the meta-test episode: a
      // random-action warmup window feeds the feature collector (so the
      // predictor trains on the same input distribution it sees at test
      // time), then the frozen adapted policy fills M'_j.
      {
        sim::SimWorld world(net, vehicles[i]);
        {
          agent::EpisodeHooks warmup;
          warmup.act = [&](int, const std::vector<double>&, long) {
            return static_cast<int>(ep_rng.uniform_int(agent::kActionCount));
          };
          warmup.on_transition = [&](int, const agent::Transition& t) {
            collectors[i].add_step(t.state, t.action, t.reward);
          };
          agent::run_episode(world, cfg.learn_start_seconds,
                             cfg.decision_interval, warmup);
        }
        agent::EpisodeHooks hooks;
        hooks.act = [&](int k, const std::vector<double>& s, long) {
          return agent::select_action(agents.nets[k].q_forward(s),
                                      cfg.query_eps(), ep_rng);
        };
        hooks.on_transition = [&](int k, const agent::Transition& t) {
          res.bank.query_memories[j][k].push(t);
        };
        const agent::EpisodeOutcome outcome = agent::run_episode(
            world, cfg.episode_seconds, cfg.decision_interval, hooks);
        collectors[i].set_travel_time(outcome.att);
      }

      if (adapted_count[j] == 0) {
        adapted_sum[j].clear();
        for (const agent::QNet& q : agents.nets)
          adapted_sum[j].push_back(q.online);
      } else {
        for (int k = 0; k < n_inter; ++k)
          add_params_inplace(adapted_sum[j][k], agents.nets[k].online);
      }
      ++adapted_count[j];
    }

    for (int j = 0; j < cfg.clusters; ++j) {
      if (adapted_count[j] == 0) continue;
      for (ParamStore& p : adapted_sum[j])
        scale_params_inplace(p, 1.0 / adapted_count[j]);
      Rng outer_rng(mix(cfg.seed, kSaltOuter,
                        static_cast<std::uint64_t>(round),
                        static_cast<std::uint64_t>(j)));
      // Iterated first-order steps: the evaluation point keeps the frozen
      // inner-adaptation offset and tracks theta0 as it moves; TD targets
      // bootstrap against the round-start initialization.
      const std::vector<ParamStore> round_target = res.bank.theta0[j];
      std::vector<ParamStore> before = res.bank.theta0[j];
      for (int s = 0; s < cfg.outer_steps(); ++s) {
        if (!global_update(res.bank, j, adapted_sum[j], round_target, cfg.dqn,
                           cfg.outer_lr, outer_rng))
          break;
        for (int k = 0; k < n_inter; ++k) {
          ParamStore& eval = adapted_sum[j][k];
          const ParamStore& now = res.bank.theta0[j][k];
          const ParamStore& was = before[k];
          for (auto& [key, arr] : eval.entries) {
            const diffcore::NumArray& a = now.at(key);
            const diffcore::NumArray& b = was.at(key);
            for (std::size_t x = 0; x < arr.size(); ++x)
              arr.data[x] += a.data[x] - b.data[x];
          }
        }
        before = res.bank.theta0[j];
      }
    }

    res.round_snapshots.push_back(res.bank.theta0);

    if (round % cfg.recluster_period == cfg.recluster_period - 1) {
      std::vector<FlowFeature> raw(n_flows);
      for (int i = 0; i < n_flows; ++i) raw[i] = make_feature(collectors[i]);
      res.bank.norm = fit_feature_norm(raw);
      std::vector<FlowFeature> normalized(n_flows);
      std::vector<std::vector<double>> points(n_flows);
      for (int i = 0; i < n_flows; ++i) {
        normalized[i] = apply_norm(res.bank.norm, raw[i]);
        points[i] = normalized[i].values;
      }
      const KmeansResult km = kmeans_recluster(
          points, cfg.clusters,
          mix(cfg.seed, kSaltKmeans, static_cast<std::uint64_t>(round)));
      res.bank.mapping = km.assignment;
      res.bank.centroids = km.centroids;
      res.last_features = normalized;

      if (cfg.train_predictor) {
        std::vector<std::vector<double>> sar(n_flows);
        for (int i = 0; i < n_flows; ++i) sar[i] = sar_subfeature(normalized[i]);
        for (int s = 0; s < cfg.predictor_steps; ++s)
          predictor_update(res.predictor, sar, res.bank.mapping,
                           cfg.predictor_lr);
      }
      for (FeatureCollector& c : collectors) c.clear();
      // The mapping changed: per-cluster query memories would otherwise keep
      // transitions attributed under the old mapping.
      res.bank.query_memories.assign(
          cfg.clusters, std::vector<agent::ReplayMemory>(
                            n_inter, agent::ReplayMemory(query_cap)));
    }
  }
  return res;
}

MetaTrainResult maml_train(const sim::Roadnet& net, const flow::FlowSet& flows,
                           const MetaConfig& cfg) {
  MetaConfig single = cfg;
  single.clusters = 1;
  single.train_predictor = false;
  return meta_train(net, flows, single);
}

std::vector<MetaTestFlowResult> meta_test(const sim::Roadnet& net,
                                          const flow::FlowSet& flows,
                                          const ClusterBank& bank,
                                          const PredictorNet& pred,
                                          const MetaConfig& cfg,
                                          std::uint64_t run_seed) {
  cfg.validate();
  flows.validate();
  if (bank.clusters < 1 || bank.theta0.empty())
    throw std::invalid_argument("meta_test: untrained bank");
  const int n_inter = static_cast<int>(net.intersections.size());

  std::vector<MetaTestFlowResult> results;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    Rng veh_rng(mix(run_seed, kSaltTestVehicles, i));
    const std::vector<sim::VehicleSpec> vehicles =
        flow::matrix_to_vehicles(flows.members[i], veh_rng);
    Rng ep_rng(mix(run_seed, kSaltTestEpisode, i));

    sim::SimWorld world(net, vehicles);
    MetaTestFlowResult r;
    r.freeflow = sim::free_flow_time(net, vehicles);

    // Warmup (t < T_s): uniformly random actions, features only.
    FeatureCollector collector;
    {
      agent::EpisodeHooks hooks;
      hooks.act = [&](int, const std::vector<double>&, long) {
        return static_cast<int>(ep_rng.uniform_int(agent::kActionCount));
      };
      hooks.on_transition = [&](int, const agent::Transition& t) {
        collector.add_step(t.state, t.action, t.reward);
      };
      agent::run_episode(world, cfg.learn_start_seconds,
                         cfg.decision_interval, hooks);
    }

    // t == T_s: predictor pick, parameter initialization copied in.
    r.warmup_action_hist = collector.action_hist();
    r.warmup_steps = collector.count();
    const FlowFeature raw = make_feature(collector);
    const FlowFeature normalized =
        bank.norm.mean.empty() ? raw : apply_norm(bank.norm, raw);
    r.warmup_sar = sar_subfeature(normalized);
    r.predicted_cluster = predict_cluster(pred, r.warmup_sar);
    if (bank.centroids.size() == static_cast<std::size_t>(bank.clusters)) {
      int best = 0;
      double best_d = -1.0;
      for (int j = 0; j < bank.clusters; ++j) {
        const std::vector<double> centroid_sar(
            bank.centroids[j].begin(), bank.centroids[j].end() - 1);
        const double d = squared_distance(r.warmup_sar, centroid_sar);
        if (best_d < 0.0 || d < best_d) {
          best_d = d;
          best = j;
        }
      }
      r.nearest_centroid_cluster = best;
    }

    AgentSet agents = AgentSet::from_theta(bank.theta0[r.predicted_cluster]);
    std::vector<agent::ReplayMemory> memory(
        n_inter, agent::ReplayMemory(cfg.dqn.capacity));

    // t > T_s: epsilon-greedy with inner updates.
    {
      agent::EpisodeHooks hooks;
      hooks.act = [&](int k, const std::vector<double>& s, long) {
        return agent::select_action(agents.nets[k].q_forward(s),
                                    cfg.dqn.eps_end, ep_rng);
      };
      hooks.on_transition = [&](int k, const agent::Transition& t) {
        memory[k].push(t);
        agent::local_update(agents.nets[k], memory[k], cfg.dqn,
                            cfg.dqn.update_cadence, ep_rng);
      };
      const agent::EpisodeOutcome outcome = agent::run_episode(
          world, cfg.episode_seconds, cfg.decision_interval, hooks);
      r.att = outcome.att;
      if (outcome.empty_flow) r.att = 0.0;
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace tsclab::meta
