#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tsclab/agent/replay.hpp"

namespace tsclab::meta {

// Streaming statistics over one flow's episode experience: per-dimension
// mean/std of encoded states (S), normalized action histogram (A), mean
// reward (R), and the episode's average travel time (T^t, training only).
class FeatureCollector {
 public:
  void add_step(std::span<const double> state, int action, double reward);
  void set_travel_time(double att) { travel_time_ = att; }
  void clear();

  bool empty() const { return count_ == 0; }
  long count() const { return count_; }

  std::vector<double> state_mean() const;
  std::vector<double> state_std() const;  // population std
  std::vector<double> action_hist() const;
  double reward_mean() const;
  std::optional<double> travel_time() const { return travel_time_; }

 private:
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::array<long, 8> action_counts_{};
  double reward_sum_ = 0.0;
  std::optional<double> travel_time_;
};

// Batch construction from a recorded trace; equals the streaming result.
FeatureCollector collect_features(
    std::span<const agent::Transition> trace);

// Fixed-length flow descriptor [S-mean | S-std | A-hist | R-mean | T^t].
// The final dimension is T^t; the predictor sub-feature excludes it.
struct FlowFeature {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

FlowFeature make_feature(const FeatureCollector& c);

// Per-dimension z-score parameters across a flow population; constant
// dimensions get their sigma floored at 1e-8.
struct FeatureNorm {
  std::vector<double> mean;
  std::vector<double> stddev;
};

FeatureNorm fit_feature_norm(const std::vector<FlowFeature>& population);
FlowFeature apply_norm(const FeatureNorm& norm, const FlowFeature& f);

// All dimensions except the trailing travel-time one.
std::vector<double> sar_subfeature(const FlowFeature& f);

}  // namespace tsclab::meta
