#pragma once

#include <functional>
#include <vector>

#include "tsclab/agent/qnet.hpp"
#include "tsclab/agent/replay.hpp"
#include "tsclab/sim/world.hpp"

namespace tsclab::agent {

// Per-tick series row for plot emission.
struct TickSample {
  long tick = 0;
  int on_road = 0;
  double running_att = 0.0;  // ATT if the run ended at this tick
};

struct DecisionLog {
  long tick = 0;
  int intersection = 0;
  int action = 0;
  double reward = 0.0;
};

struct EpisodeHooks {
  // Chooses a phase per intersection from the encoded state.
  std::function<int(int intersection, const std::vector<double>& state,
                    long decision)>
      act;
  // Receives the completed transition (reward = mean per-tick reward over
  // the decision window).
  std::function<void(int intersection, const Transition&)> on_transition;
  bool record_series = false;
  bool record_decisions = false;
};

struct EpisodeOutcome {
  double att = 0.0;
  bool empty_flow = false;
  long decisions = 0;
  std::vector<TickSample> series;
  std::vector<DecisionLog> decision_log;
};

// Runs `horizon` seconds in windows of `decision_interval` ticks. Actions
// are chosen once per window and held; rewards are the per-tick pressure
// rewards averaged over the window.
EpisodeOutcome run_episode(sim::SimWorld& world, long horizon,
                           int decision_interval, const EpisodeHooks& hooks);

}  // namespace tsclab::agent
