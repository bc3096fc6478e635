#pragma once

#include "tsclab/flow/matrix.hpp"

namespace tsclab::flow {

// Per-route synthesis parameters fitted from real flows (mean/std of the
// per-cell counts of each route).
struct RouteStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

RouteStats fit_route_stats(const FlowSet& real);

// Copy of `m` with rows r1 and r2 exchanged; total count is preserved.
FlowMatrix swap_routes(const FlowMatrix& m, int r1, int r2);

// Synthetic flows: every cell of route r drawn from the named distribution,
// clamped at 0 and rounded to integer counts.
FlowMatrix synth_poisson(const FlowMatrix& like,
                         const std::vector<double>& lambda, Rng& rng);
FlowMatrix synth_uniform(const FlowMatrix& like, const std::vector<double>& lo,
                         const std::vector<double>& hi, Rng& rng);
FlowMatrix synth_gaussian(const FlowMatrix& like,
                          const std::vector<double>& mean,
                          const std::vector<double>& stddev, Rng& rng);

// Data-augmentation toolkit: the real flows plus seeded route-row shuffles
// and Poisson/Uniform/Gaussian synthetic flows (parameters fitted to the
// real flows) mixed in until the set reaches n_target members.
FlowSet augment(const FlowSet& real, std::size_t n_target,
                std::uint64_t seed);

// Pads (or trims) a set to exactly n members by seeded resampling; used to
// equalize set sizes before the assignment-based W-distance.
FlowSet resample_to(const FlowSet& set, std::size_t n, std::uint64_t seed);

}  // namespace tsclab::flow
