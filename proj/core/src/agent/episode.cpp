#include "tsclab/agent/episode.hpp"

#include <stdexcept>

namespace tsclab::agent {

EpisodeOutcome run_episode(sim::SimWorld& world, long horizon,
                           int decision_interval, const EpisodeHooks& hooks) {
  if (decision_interval < 1)
    throw std::invalid_argument("run_episode: decision_interval >= 1");
  if (!hooks.act) throw std::invalid_argument("run_episode: act hook required");

  const int n_inter = world.intersection_count();
  EpisodeOutcome out;
  std::vector<std::vector<double>> states(n_inter);
  std::vector<int> actions(n_inter, 0);
  std::vector<double> reward_acc(n_inter, 0.0);

  while (world.clock() < horizon) {
    const long decision = out.decisions;
    for (int k = 0; k < n_inter; ++k) {
      states[k] = encode_state(world.net(), k, world.observe(k));
      actions[k] = hooks.act(k, states[k], decision);
    }
    std::fill(reward_acc.begin(), reward_acc.end(), 0.0);
    int ticks = 0;
    for (int i = 0; i < decision_interval && world.clock() < horizon; ++i) {
      const long tick_before = world.clock();
      world.step(actions);
      for (int k = 0; k < n_inter; ++k)
        reward_acc[k] += world.pressure(k).reward;
      ++ticks;
      if (hooks.record_series) {
        TickSample s;
        s.tick = tick_before + 1;
        s.on_road = world.on_road();
        s.running_att = average_travel_time(world.travel_log(), s.tick).seconds;
        out.series.push_back(s);
      }
    }
    for (int k = 0; k < n_inter; ++k) {
      const double mean_reward = ticks > 0 ? reward_acc[k] / ticks : 0.0;
      if (hooks.record_decisions)
        out.decision_log.push_back(
            DecisionLog{world.clock(), k, actions[k], mean_reward});
      if (hooks.on_transition) {
        Transition t;
        t.state = states[k];
        t.action = actions[k];
        t.reward = mean_reward;
        t.next_state = encode_state(world.net(), k, world.observe(k));
        hooks.on_transition(k, t);
      }
    }
    ++out.decisions;
  }

  const sim::AttResult att = sim::average_travel_time(world.travel_log(), horizon);
  out.att = att.seconds;
  out.empty_flow = att.empty_flow;
  return out;
}

}  // namespace tsclab::agent
