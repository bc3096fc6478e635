#pragma once

#include <string>
#include <vector>

#include "tsclab/rng.hpp"
#include "tsclab/sim/world.hpp"

namespace tsclab::flow {

struct Route {
  std::string id;
  std::vector<std::string> lanes;

  bool operator==(const Route& other) const = default;
};

// |R| x T matrix of non-negative vehicle counts: entry (r, t) counts the
// vehicles on route r departing within time bin t.
struct FlowMatrix {
  std::vector<Route> routes;
  int time_bins = 0;      // T
  int interval = 1;       // seconds per bin
  std::vector<int> counts;  // row-major, routes x time_bins

  FlowMatrix() = default;
  FlowMatrix(std::vector<Route> r, int t_bins, int ival);

  int route_count() const { return static_cast<int>(routes.size()); }
  int& at(int r, int t) { return counts[static_cast<std::size_t>(r) * time_bins + t]; }
  int at(int r, int t) const { return counts[static_cast<std::size_t>(r) * time_bins + t]; }
  long total() const;

  void validate() const;  // throws when an invariant is broken

  bool operator==(const FlowMatrix& other) const = default;
};

// Empirical sample of flow matrices sharing (routes, T, interval).
struct FlowSet {
  std::vector<FlowMatrix> members;
  std::string provenance = "real";  // real | augmented | generated-at-<eps>

  std::size_t size() const { return members.size(); }
  void validate() const;
};

// Bins a vehicle list into the count matrix. Every vehicle's route must be
// one of `routes` (matched by lane sequence) and its departure must fall
// inside [0, T*interval).
FlowMatrix flow_matrix(const std::vector<sim::VehicleSpec>& vehicles,
                       std::vector<Route> routes, int time_bins, int interval);

// Inverse of flow_matrix: emits V[r][t] vehicles per cell with departure
// times drawn uniformly (seeded) within the cell's interval. Round-trips:
// flow_matrix(matrix_to_vehicles(V)) == V.
std::vector<sim::VehicleSpec> matrix_to_vehicles(const FlowMatrix& m,
                                                 Rng& rng);

// V / sum(V); rejects zero-total flows.
std::vector<double> normalize(const FlowMatrix& m);

}  // namespace tsclab::flow
