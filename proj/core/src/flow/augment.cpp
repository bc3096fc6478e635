#include "tsclab/flow/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsclab::flow {

namespace {

int clamp_count(double v) {
  if (v < 0.0) return 0;
  return static_cast<int>(std::llround(v));
}

}  // namespace

RouteStats fit_route_stats(const FlowSet& real) {
  if (real.members.empty())
    throw std::invalid_argument("fit_route_stats: need at least one flow");
  const FlowMatrix& first = real.members.front();
  const int routes = first.route_count();
  RouteStats stats;
  stats.mean.assign(routes, 0.0);
  stats.stddev.assign(routes, 0.0);
  const double cells =
      static_cast<double>(real.members.size()) * first.time_bins;
  for (const FlowMatrix& m : real.members)
    for (int r = 0; r < routes; ++r)
      for (int t = 0; t < m.time_bins; ++t) stats.mean[r] += m.at(r, t);
  for (int r = 0; r < routes; ++r) stats.mean[r] /= cells;
  for (const FlowMatrix& m : real.members)
    for (int r = 0; r < routes; ++r)
      for (int t = 0; t < m.time_bins; ++t) {
        const double d = m.at(r, t) - stats.mean[r];
        stats.stddev[r] += d * d;
      }
  for (int r = 0; r < routes; ++r) stats.stddev[r] = std::sqrt(stats.stddev[r] / cells);
  return stats;
}

FlowMatrix swap_routes(const FlowMatrix& m, int r1, int r2) {
  if (r1 < 0 || r2 < 0 || r1 >= m.route_count() || r2 >= m.route_count())
    throw std::invalid_argument("swap_routes: route index out of range");
  FlowMatrix out = m;
  for (int t = 0; t < m.time_bins; ++t)
    std::swap(out.at(r1, t), out.at(r2, t));
  return out;
}

FlowMatrix synth_poisson(const FlowMatrix& like,
                         const std::vector<double>& lambda, Rng& rng) {
  FlowMatrix out(like.routes, like.time_bins, like.interval);
  for (int r = 0; r < out.route_count(); ++r)
    for (int t = 0; t < out.time_bins; ++t)
      out.at(r, t) = static_cast<int>(rng.poisson(lambda.at(r)));
  return out;
}

FlowMatrix synth_uniform(const FlowMatrix& like, const std::vector<double>& lo,
                         const std::vector<double>& hi, Rng& rng) {
  FlowMatrix out(like.routes, like.time_bins, like.interval);
  for (int r = 0; r < out.route_count(); ++r)
    for (int t = 0; t < out.time_bins; ++t)
      out.at(r, t) = clamp_count(rng.uniform(lo.at(r), hi.at(r)));
  return out;
}

FlowMatrix synth_gaussian(const FlowMatrix& like,
                          const std::vector<double>& mean,
                          const std::vector<double>& stddev, Rng& rng) {
  FlowMatrix out(like.routes, like.time_bins, like.interval);
  for (int r = 0; r < out.route_count(); ++r)
    for (int t = 0; t < out.time_bins; ++t)
      out.at(r, t) = clamp_count(rng.gaussian(mean.at(r), stddev.at(r)));
  return out;
}

FlowSet resample_to(const FlowSet& set, std::size_t n, std::uint64_t seed) {
  if (set.members.empty())
    throw std::invalid_argument("resample_to: empty set");
  FlowSet out;
  out.provenance = set.provenance;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < set.members.size())
      out.members.push_back(set.members[i]);
    else
      out.members.push_back(set.members[rng.uniform_int(set.members.size())]);
  }
  return out;
}

FlowSet augment(const FlowSet& real, std::size_t n_target,
                std::uint64_t seed) {
  if (real.members.empty())
    throw std::invalid_argument("augment: need at least one real flow");
  real.validate();
  Rng rng(seed);
  const RouteStats stats = fit_route_stats(real);
  const int routes = real.members.front().route_count();

  FlowSet out;
  out.provenance = "augmented";
  for (const FlowMatrix& m : real.members) {
    if (out.members.size() >= n_target) break;
    out.members.push_back(m);
  }

  std::vector<double> lo(routes, 0.0), hi(routes);
  for (int r = 0; r < routes; ++r) hi[r] = 2.0 * stats.mean[r];

  int kind = 0;
  while (out.members.size() < n_target) {
    const FlowMatrix& base =
        real.members[rng.uniform_int(real.members.size())];
    switch (kind % 4) {
      case 0: {  // route shuffle: exchange two distinct rows
        if (routes >= 2) {
          const int r1 = static_cast<int>(rng.uniform_int(routes));
          int r2 = static_cast<int>(rng.uniform_int(routes - 1));
          if (r2 >= r1) ++r2;
          out.members.push_back(swap_routes(base, r1, r2));
        } else {
          out.members.push_back(base);
        }
        break;
      }
      case 1:
        out.members.push_back(synth_poisson(base, stats.mean, rng));
        break;
      case 2:
        out.members.push_back(synth_uniform(base, lo, hi, rng));
        break;
      default:
        out.members.push_back(synth_gaussian(base, stats.mean, stats.stddev, rng));
        break;
    }
    ++kind;
  }
  return out;
}

}  // namespace tsclab::flow
