#include "tsclab/flow/matrix.hpp"

#include <stdexcept>

namespace tsclab::flow {

FlowMatrix::FlowMatrix(std::vector<Route> r, int t_bins, int ival)
    : routes(std::move(r)), time_bins(t_bins), interval(ival) {
  if (routes.empty()) throw std::invalid_argument("FlowMatrix: |R| must be >= 1");
  if (time_bins < 1) throw std::invalid_argument("FlowMatrix: T must be >= 1");
  if (interval < 1) throw std::invalid_argument("FlowMatrix: interval must be >= 1");
  counts.assign(routes.size() * static_cast<std::size_t>(time_bins), 0);
}

long FlowMatrix::total() const {
  long n = 0;
  for (int c : counts) n += c;
  return n;
}

void FlowMatrix::validate() const {
  if (routes.empty() || time_bins < 1 || interval < 1)
    throw std::invalid_argument("FlowMatrix: bad dimensions");
  if (counts.size() != routes.size() * static_cast<std::size_t>(time_bins))
    throw std::invalid_argument("FlowMatrix: count buffer size mismatch");
  for (int c : counts)
    if (c < 0) throw std::invalid_argument("FlowMatrix: negative count");
}

void FlowSet::validate() const {
  for (const FlowMatrix& m : members) {
    m.validate();
    if (m.routes != members.front().routes ||
        m.time_bins != members.front().time_bins ||
        m.interval != members.front().interval)
      throw std::invalid_argument(
          "FlowSet: members must share (routes, T, interval)");
  }
}

FlowMatrix flow_matrix(const std::vector<sim::VehicleSpec>& vehicles,
                       std::vector<Route> routes, int time_bins, int interval) {
  FlowMatrix m(std::move(routes), time_bins, interval);
  const long horizon = static_cast<long>(time_bins) * interval;
  for (const sim::VehicleSpec& v : vehicles) {
    int route_idx = -1;
    for (int r = 0; r < m.route_count(); ++r) {
      if (m.routes[r].lanes == v.route) {
        route_idx = r;
        break;
      }
    }
    if (route_idx < 0)
      throw std::invalid_argument("flow_matrix: vehicle " +
                                  std::to_string(v.id) +
                                  " follows an unknown route");
    if (v.depart < 0 || v.depart >= horizon)
      throw std::invalid_argument("flow_matrix: vehicle " +
                                  std::to_string(v.id) +
                                  " departs outside the horizon");
    ++m.at(route_idx, static_cast<int>(v.depart / interval));
  }
  return m;
}

std::vector<sim::VehicleSpec> matrix_to_vehicles(const FlowMatrix& m,
                                                 Rng& rng) {
  m.validate();
  std::vector<sim::VehicleSpec> out;
  int next_id = 0;
  for (int r = 0; r < m.route_count(); ++r) {
    for (int t = 0; t < m.time_bins; ++t) {
      for (int k = 0; k < m.at(r, t); ++k) {
        sim::VehicleSpec v;
        v.id = next_id++;
        v.route = m.routes[r].lanes;
        v.depart = static_cast<long>(t) * m.interval +
                   static_cast<long>(rng.uniform_int(
                       static_cast<std::uint64_t>(m.interval)));
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

std::vector<double> normalize(const FlowMatrix& m) {
  const long total = m.total();
  if (total <= 0)
    throw std::invalid_argument("normalize: zero-total flow rejected");
  std::vector<double> out(m.counts.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<double>(m.counts[i]) / static_cast<double>(total);
  return out;
}

}  // namespace tsclab::flow
