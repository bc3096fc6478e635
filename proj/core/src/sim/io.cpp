#include "tsclab/sim/io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tsclab::sim {

using nlohmann::json;

namespace {

constexpr const char* kSchemaVersion = "tsclab-v1";

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  json j;
  f >> j;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << j.dump(2) << "\n";
}

void check_version(const json& j, const std::string& path) {
  if (!j.contains("version") || j["version"] != kSchemaVersion)
    throw std::runtime_error(path + ": expected schema version '" +
                             kSchemaVersion + "'");
}

}  // namespace

void save_roadnet(const std::string& path, const Roadnet& net) {
  json j;
  j["version"] = kSchemaVersion;
  j["internal_links"] = net.internal_links;
  json lanes = json::array();
  for (const Lane& l : net.lanes)
    lanes.push_back({{"id", l.id},
                     {"length", l.length},
                     {"speed", l.free_speed},
                     {"x_max", l.x_max}});
  j["lanes"] = std::move(lanes);
  json movements = json::array();
  for (const Movement& m : net.movements)
    movements.push_back({{"from", net.lanes[m.from_lane].id},
                         {"to", net.lanes[m.to_lane].id},
                         {"intersection", net.intersections[m.intersection].id}});
  j["movements"] = std::move(movements);
  json inters = json::array();
  for (const Intersection& it : net.intersections) {
    json in_ids = json::array(), out_ids = json::array();
    for (int l : it.in_lanes) in_ids.push_back(net.lanes[l].id);
    for (int l : it.out_lanes) out_ids.push_back(net.lanes[l].id);
    inters.push_back(
        {{"id", it.id}, {"in_lanes", in_ids}, {"out_lanes", out_ids}});
  }
  j["intersections"] = std::move(inters);
  json phases = json::array();
  for (const Intersection& it : net.intersections)
    for (int p = 0; p < kPhaseCount; ++p)
      phases.push_back({{"intersection", it.id},
                        {"index", p},
                        {"movements", it.phases[p]}});
  j["phases"] = std::move(phases);
  write_json(path, j);
}

Roadnet load_roadnet(const std::string& path) {
  const json j = read_json(path);
  check_version(j, path);
  Roadnet net;
  net.internal_links = j.value("internal_links", 0);
  for (const json& lj : j.at("lanes")) {
    Lane l;
    l.id = lj.at("id").get<std::string>();
    l.length = lj.at("length").get<double>();
    l.free_speed = lj.at("speed").get<double>();
    l.x_max = lj.at("x_max").get<int>();
    if (l.length <= 0.0 || l.free_speed <= 0.0 || l.x_max < 1)
      throw std::runtime_error(path + ": invalid lane '" + l.id + "'");
    net.lanes.push_back(std::move(l));
  }
  std::map<std::string, int> lane_idx;
  for (std::size_t i = 0; i < net.lanes.size(); ++i)
    lane_idx[net.lanes[i].id] = static_cast<int>(i);
  std::map<std::string, int> inter_idx;
  for (const json& ij : j.at("intersections")) {
    Intersection it;
    it.id = ij.at("id").get<std::string>();
    for (const json& x : ij.at("in_lanes"))
      it.in_lanes.push_back(lane_idx.at(x.get<std::string>()));
    for (const json& x : ij.at("out_lanes"))
      it.out_lanes.push_back(lane_idx.at(x.get<std::string>()));
    inter_idx[it.id] = static_cast<int>(net.intersections.size());
    net.intersections.push_back(std::move(it));
  }
  for (const json& mj : j.at("movements")) {
    Movement m;
    m.from_lane = lane_idx.at(mj.at("from").get<std::string>());
    m.to_lane = lane_idx.at(mj.at("to").get<std::string>());
    m.intersection = inter_idx.at(mj.at("intersection").get<std::string>());
    if (m.from_lane == m.to_lane)
      throw std::runtime_error(path + ": degenerate movement");
    net.intersections[m.intersection].movements.push_back(
        static_cast<int>(net.movements.size()));
    net.movements.push_back(m);
  }
  std::map<std::string, int> phase_seen;
  for (const json& pj : j.at("phases")) {
    const std::string iid = pj.at("intersection").get<std::string>();
    const int p = pj.at("index").get<int>();
    if (p < 0 || p >= kPhaseCount)
      throw std::runtime_error(path + ": phase index out of range");
    Intersection& it = net.intersections[inter_idx.at(iid)];
    it.phases[p] = pj.at("movements").get<std::vector<int>>();
    ++phase_seen[iid];
  }
  for (const Intersection& it : net.intersections)
    if (phase_seen[it.id] != kPhaseCount)
      throw std::runtime_error(path + ": intersection '" + it.id +
                               "' must define exactly 8 phases");
  net.rebuild_indexes();
  return net;
}

void save_flow(const std::string& path, const std::vector<VehicleSpec>& flow) {
  json j;
  j["version"] = kSchemaVersion;
  json vehicles = json::array();
  for (const VehicleSpec& v : flow)
    vehicles.push_back(
        {{"id", v.id}, {"route", v.route}, {"depart", v.depart}});
  j["vehicles"] = std::move(vehicles);
  write_json(path, j);
}

std::vector<VehicleSpec> load_flow(const std::string& path) {
  const json j = read_json(path);
  check_version(j, path);
  std::vector<VehicleSpec> flow;
  for (const json& vj : j.at("vehicles")) {
    VehicleSpec v;
    v.id = vj.at("id").get<int>();
    v.route = vj.at("route").get<std::vector<std::string>>();
    v.depart = vj.at("depart").get<long>();
    flow.push_back(std::move(v));
  }
  return flow;
}

}  // namespace tsclab::sim
