#include "tsclab/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsclab::sim {

SimWorld::SimWorld(const Roadnet& net, std::vector<VehicleSpec> flow,
                   SimOptions opts)
    : net_(&net), opts_(std::move(opts)) {
  phase_.assign(net.intersections.size(), 0);
  queues_.resize(net.lanes.size());
  pending_.resize(net.lanes.size());
  vehicles_.resize(flow.size());
  log_.resize(flow.size());

  // Stable admission order: (depart, id).
  std::vector<int> order(flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (flow[a].depart != flow[b].depart) return flow[a].depart < flow[b].depart;
    return flow[a].id < flow[b].id;
  });

  for (std::size_t i = 0; i < flow.size(); ++i) {
    const VehicleSpec& spec = flow[i];
    if (spec.route.empty())
      throw std::invalid_argument("SimWorld: vehicle " +
                                  std::to_string(spec.id) + " has empty route");
    if (spec.depart < 0)
      throw std::invalid_argument("SimWorld: negative departure time");
    VehState st;
    st.depart = spec.depart;
    st.route.reserve(spec.route.size());
    for (const std::string& lid : spec.route)
      st.route.push_back(net.lane_id(lid));
    for (std::size_t k = 0; k + 1 < st.route.size(); ++k) {
      if (net.movement_between(st.route[k], st.route[k + 1]) < 0)
        throw std::invalid_argument(
            "SimWorld: route of vehicle " + std::to_string(spec.id) +
            " is not a connected path (" + spec.route[k] + " -> " +
            spec.route[k + 1] + ")");
    }
    vehicles_[i] = std::move(st);
    log_[i] = TravelRecord{spec.id, spec.depart, -1};
  }
  for (int idx : order) pending_[vehicles_[idx].route[0]].push_back(idx);
}

bool SimWorld::dwell_done(const Queued& q, int lane) const {
  return clock_ - q.entered >= net_->lanes[lane].dwell_seconds();
}

void SimWorld::enter_lane(int lane, int veh) {
  queues_[lane].push_back(Queued{veh, clock_});
  if (opts_.on_lane_enter) opts_.on_lane_enter(lane, log_[veh].vehicle, clock_);
}

void SimWorld::finish_vehicle(int lane) {
  const Queued q = queues_[lane].front();
  queues_[lane].pop_front();
  if (opts_.on_lane_exit) opts_.on_lane_exit(lane, log_[q.veh].vehicle, clock_);
  log_[q.veh].finish = clock_;
  ++finished_;
}

void SimWorld::step(const std::vector<int>& actions) {
  if (actions.size() != phase_.size())
    throw std::invalid_argument("step: expected one action per intersection");
  for (int a : actions)
    if (a < 0 || a >= kPhaseCount)
      throw std::invalid_argument("step: invalid phase id " +
                                  std::to_string(a));
  for (std::size_t i = 0; i < actions.size(); ++i) phase_[i] = actions[i];

  const int lane_n = static_cast<int>(queues_.size());

  if (opts_.free_flow) {
    // Unobstructed dynamics: every dwell-complete vehicle advances.
    for (int lane = 0; lane < lane_n; ++lane) {
      while (!queues_[lane].empty() && dwell_done(queues_[lane].front(), lane)) {
        Queued q = queues_[lane].front();
        VehState& v = vehicles_[q.veh];
        if (v.pos + 1 == v.route.size()) {
          finish_vehicle(lane);
        } else {
          queues_[lane].pop_front();
          if (opts_.on_lane_exit)
            opts_.on_lane_exit(lane, log_[q.veh].vehicle, clock_);
          ++v.pos;
          enter_lane(v.route[v.pos], q.veh);
        }
      }
    }
    for (int lane = 0; lane < lane_n; ++lane) {
      auto& pend = pending_[lane];
      while (!pend.empty() && vehicles_[pend.front()].depart <= clock_) {
        const int veh = pend.front();
        pend.pop_front();
        ++injected_;
        enter_lane(lane, veh);
      }
    }
    ++clock_;
    return;
  }

  // 1. Finishes: head-of-queue vehicles standing on their final route lane.
  for (int lane = 0; lane < lane_n; ++lane) {
    while (!queues_[lane].empty()) {
      const Queued& q = queues_[lane].front();
      const VehState& v = vehicles_[q.veh];
      if (v.pos + 1 != v.route.size() || !dwell_done(q, lane)) break;
      finish_vehicle(lane);
    }
  }

  // 2. Crossings: one head vehicle per green movement per second.
  for (const Intersection& inter : net_->intersections) {
    const int inter_idx = net_->intersection_index.at(inter.id);
    for (int mv_idx : inter.phases[phase_[inter_idx]]) {
      const Movement& mv = net_->movements[mv_idx];
      auto& q = queues_[mv.from_lane];
      if (q.empty()) continue;
      const Queued head = q.front();
      VehState& v = vehicles_[head.veh];
      if (v.pos + 1 >= v.route.size()) continue;  // finishing handled above
      if (v.route[v.pos + 1] != mv.to_lane) continue;
      if (!dwell_done(head, mv.from_lane)) continue;
      if (lane_count(mv.to_lane) >= net_->lanes[mv.to_lane].x_max) continue;
      q.pop_front();
      if (opts_.on_lane_exit)
        opts_.on_lane_exit(mv.from_lane, log_[head.veh].vehicle, clock_);
      ++v.pos;
      enter_lane(mv.to_lane, head.veh);
    }
  }

  // 3. Departures: admit per source lane in (depart, id) order while there
  // is capacity; blocked departures wait (travel time still runs from the
  // scheduled time).
  for (int lane = 0; lane < lane_n; ++lane) {
    auto& pend = pending_[lane];
    while (!pend.empty() && vehicles_[pend.front()].depart <= clock_ &&
           lane_count(lane) < net_->lanes[lane].x_max) {
      const int veh = pend.front();
      pend.pop_front();
      ++injected_;
      enter_lane(lane, veh);
    }
  }

  ++clock_;
}

Observation SimWorld::observe(int intersection) const {
  const Intersection& inter = net_->intersections.at(intersection);
  Observation obs;
  obs.phase = phase_[intersection];
  obs.incoming_counts.reserve(inter.in_lanes.size());
  obs.outgoing_counts.reserve(inter.out_lanes.size());
  for (int l : inter.in_lanes) obs.incoming_counts.push_back(lane_count(l));
  for (int l : inter.out_lanes) obs.outgoing_counts.push_back(lane_count(l));
  return obs;
}

PressureResult SimWorld::pressure(int intersection) const {
  const Intersection& inter = net_->intersections.at(intersection);
  PressureResult res;
  res.movement_pressure.reserve(inter.movements.size());
  double signed_sum = 0.0, abs_sum = 0.0;
  for (int mv_idx : inter.movements) {
    const Movement& mv = net_->movements[mv_idx];
    const Lane& lin = net_->lanes[mv.from_lane];
    const Lane& lout = net_->lanes[mv.to_lane];
    const double w = static_cast<double>(lane_count(mv.from_lane)) / lin.x_max -
                     static_cast<double>(lane_count(mv.to_lane)) / lout.x_max;
    res.movement_pressure.push_back(w);
    signed_sum += w;
    abs_sum += std::fabs(w);
  }
  res.intersection_pressure = opts_.pressure_mode == PressureMode::abs_of_sum
                                  ? std::fabs(signed_sum)
                                  : abs_sum;
  res.reward = -res.intersection_pressure;
  return res;
}

AttResult average_travel_time(const std::vector<TravelRecord>& log,
                              long horizon) {
  if (log.empty()) return AttResult{0.0, true};
  double total = 0.0;
  for (const TravelRecord& r : log) {
    if (r.finish >= 0 && r.finish <= horizon)
      total += static_cast<double>(r.finish - r.scheduled_depart);
    else
      total += static_cast<double>(
          std::max<long>(0, horizon - r.scheduled_depart));
  }
  return AttResult{total / static_cast<double>(log.size()), false};
}

double free_flow_time(const Roadnet& net,
                      const std::vector<VehicleSpec>& flow) {
  if (flow.empty()) return 0.0;
  double total = 0.0;
  for (const VehicleSpec& v : flow) {
    long t = 0;
    for (const std::string& lid : v.route)
      t += net.lanes[net.lane_id(lid)].dwell_seconds();
    total += static_cast<double>(t);
  }
  return total / static_cast<double>(flow.size());
}

}  // namespace tsclab::sim
