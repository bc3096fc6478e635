#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tsclab::sim {

inline constexpr int kPhaseCount = 8;

struct LaneParams {
  double length = 300.0;    // meters
  double free_speed = 10.0; // m/s
  int x_max = 20;           // capacity, vehicles
};

struct Lane {
  std::string id;
  double length = 300.0;
  double free_speed = 10.0;
  int x_max = 20;

  // Whole seconds a vehicle must dwell before it may leave the lane.
  int dwell_seconds() const;
};

// One signalized (incoming lane -> outgoing lane) pair at an intersection.
struct Movement {
  int from_lane = -1;
  int to_lane = -1;
  int intersection = -1;
};

struct Intersection {
  std::string id;
  std::vector<int> in_lanes;   // sorted by lane id
  std::vector<int> out_lanes;  // sorted by lane id
  std::vector<int> movements;  // indices into Roadnet::movements
  // phases[p] = movement indices green under phase p; exactly 8 phases.
  std::array<std::vector<int>, kPhaseCount> phases;
};

struct Roadnet {
  std::vector<Lane> lanes;
  std::vector<Movement> movements;
  std::vector<Intersection> intersections;
  std::map<std::string, int> lane_index;
  std::map<std::string, int> intersection_index;
  // Undirected adjacencies between intersections (grid edges).
  int internal_links = 0;

  int lane_id(const std::string& id) const;
  int intersection_id(const std::string& id) const;
  // -1 when (from,to) is not a movement anywhere.
  int movement_between(int from_lane, int to_lane) const;

  void rebuild_indexes();

 private:
  std::map<std::int64_t, int> movement_lookup_;
};

// rows x cols grid of 4-approach intersections. Each approach carries two
// incoming lanes (through-lane, left-lane) and each side two outgoing lanes;
// boundary lanes act as sources/sinks. Every intersection gets the standard
// 8 phases: NS-through, EW-through, NS-left, EW-left, and the four
// single-approach through+left combinations.
Roadnet build_grid(int rows, int cols, const LaneParams& lane = {});

}  // namespace tsclab::sim
