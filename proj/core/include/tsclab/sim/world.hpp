#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "tsclab/sim/roadnet.hpp"

namespace tsclab::sim {

struct VehicleSpec {
  int id = 0;
  std::vector<std::string> route;  // ordered lane ids, a connected path
  long depart = 0;                 // scheduled departure, seconds
};

// State/reward observation for one intersection.
struct Observation {
  int phase = 0;                      // one-hot encoded downstream
  std::vector<int> incoming_counts;   // x(l), lane-id order
  std::vector<int> outgoing_counts;
};

enum class PressureMode {
  // P_i = |sum_m w(m)| per the displayed reward equation (default).
  abs_of_sum,
  // P_i = sum_m |w(m)|; selectable for sensitivity runs.
  sum_of_abs,
};

struct PressureResult {
  std::vector<double> movement_pressure;  // w per movement of the intersection
  double intersection_pressure = 0.0;     // P_i
  double reward = 0.0;                    // r_i = -P_i
};

struct TravelRecord {
  int vehicle = 0;
  long scheduled_depart = 0;
  long finish = -1;  // tick the vehicle left the network; -1 if still out
};

struct AttResult {
  double seconds = 0.0;
  bool empty_flow = false;  // warning flag: no vehicles in the flow
};

struct SimOptions {
  PressureMode pressure_mode = PressureMode::abs_of_sum;
  // Every movement permanently green, infinite capacity, no head-of-queue
  // serialization: the oracle configuration behind free-flow travel time.
  bool free_flow = false;
  std::function<void(int lane, int vehicle, long tick)> on_lane_enter;
  std::function<void(int lane, int vehicle, long tick)> on_lane_exit;
};

// Deterministic discrete-time queue-and-dwell microsimulation. One step is
// one second: phases are set from the actions, finished vehicles leave,
// head-of-queue vehicles cross green movements after dwelling
// ceil(length/free_speed) seconds when the target lane has spare capacity
// (at most one crossing per movement per second), then scheduled departures
// are admitted source-lane FIFO if capacity allows.
class SimWorld {
 public:
  SimWorld(const Roadnet& net, std::vector<VehicleSpec> flow,
           SimOptions opts = {});

  void step(const std::vector<int>& actions);

  Observation observe(int intersection) const;
  PressureResult pressure(int intersection) const;

  long clock() const { return clock_; }
  int intersection_count() const {
    return static_cast<int>(net_->intersections.size());
  }
  int active_phase(int intersection) const { return phase_[intersection]; }

  int lane_count(int lane) const {
    return static_cast<int>(queues_[lane].size());
  }

  int injected() const { return injected_; }
  int finished() const { return finished_; }
  int on_road() const { return injected_ - finished_; }

  const std::vector<TravelRecord>& travel_log() const { return log_; }
  const Roadnet& net() const { return *net_; }

 private:
  struct Queued {
    int veh;
    long entered;
  };
  struct VehState {
    std::vector<int> route;  // lane indices
    std::size_t pos = 0;
    long depart = 0;
  };

  bool dwell_done(const Queued& q, int lane) const;
  void enter_lane(int lane, int veh);
  void finish_vehicle(int lane);

  const Roadnet* net_;
  SimOptions opts_;
  long clock_ = 0;
  std::vector<int> phase_;
  std::vector<std::deque<Queued>> queues_;
  std::vector<VehState> vehicles_;
  // Pending departures bucketed per source lane, FIFO by (depart, id).
  std::vector<std::deque<int>> pending_;
  std::vector<TravelRecord> log_;
  int injected_ = 0;
  int finished_ = 0;
};

// Mean origin-to-destination time; unfinished vehicles contribute
// (horizon - scheduled depart). Empty flow yields 0 with the warning flag.
AttResult average_travel_time(const std::vector<TravelRecord>& log,
                              long horizon);

// Policy-independent lower bound: per vehicle, the sum of lane dwell times
// along its route, averaged over the flow.
double free_flow_time(const Roadnet& net,
                      const std::vector<VehicleSpec>& flow);

}  // namespace tsclab::sim
