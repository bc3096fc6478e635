#include "tsclab/meta/features.hpp"

#include <cmath>
#include <stdexcept>

namespace tsclab::meta {

void FeatureCollector::add_step(std::span<const double> state, int action,
                                double reward) {
  if (action < 0 || action >= 8)
    throw std::invalid_argument("FeatureCollector: action out of range");
  if (count_ == 0) {
    mean_.assign(state.begin(), state.end());
    m2_.assign(state.size(), 0.0);
  } else if (state.size() != mean_.size()) {
    throw std::invalid_argument("FeatureCollector: state dimension changed");
  } else {
    // Welford update.
    for (std::size_t i = 0; i < state.size(); ++i) {
      const double delta = state[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_ + 1);
      m2_[i] += delta * (state[i] - mean_[i]);
    }
  }
  ++count_;
  ++action_counts_[static_cast<std::size_t>(action)];
  reward_sum_ += reward;
}

void FeatureCollector::clear() {
  count_ = 0;
  mean_.clear();
  m2_.clear();
  action_counts_.fill(0);
  reward_sum_ = 0.0;
  travel_time_.reset();
}

std::vector<double> FeatureCollector::state_mean() const {
  if (count_ == 0) throw std::logic_error("FeatureCollector: empty");
  return mean_;
}

std::vector<double> FeatureCollector::state_std() const {
  if (count_ == 0) throw std::logic_error("FeatureCollector: empty");
  std::vector<double> out(m2_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(m2_[i] / static_cast<double>(count_));
  return out;
}

std::vector<double> FeatureCollector::action_hist() const {
  if (count_ == 0) throw std::logic_error("FeatureCollector: empty");
  std::vector<double> out(8);
  long total = 0;
  for (long c : action_counts_) total += c;
  for (std::size_t a = 0; a < 8; ++a)
    out[a] = static_cast<double>(action_counts_[a]) / total;
  return out;
}

double FeatureCollector::reward_mean() const {
  if (count_ == 0) throw std::logic_error("FeatureCollector: empty");
  return reward_sum_ / static_cast<double>(count_);
}

FeatureCollector collect_features(std::span<const agent::Transition> trace) {
  if (trace.empty())
    throw std::invalid_argument("collect_features: empty trace rejected");
  FeatureCollector c;
  for (const agent::Transition& t : trace)
    c.add_step(t.state, t.action, t.reward);
  return c;
}

FlowFeature make_feature(const FeatureCollector& c) {
  if (c.empty()) throw std::invalid_argument("make_feature: empty collector");
  FlowFeature f;
  const std::vector<double> sm = c.state_mean();
  const std::vector<double> ss = c.state_std();
  const std::vector<double> ah = c.action_hist();
  f.values.reserve(sm.size() + ss.size() + ah.size() + 2);
  f.values.insert(f.values.end(), sm.begin(), sm.end());
  f.values.insert(f.values.end(), ss.begin(), ss.end());
  f.values.insert(f.values.end(), ah.begin(), ah.end());
  f.values.push_back(c.reward_mean());
  f.values.push_back(c.travel_time().value_or(0.0));
  return f;
}

FeatureNorm fit_feature_norm(const std::vector<FlowFeature>& population) {
  if (population.empty())
    throw std::invalid_argument("fit_feature_norm: empty population");
  const std::size_t dim = population.front().size();
  FeatureNorm norm;
  norm.mean.assign(dim, 0.0);
  norm.stddev.assign(dim, 0.0);
  for (const FlowFeature& f : population) {
    if (f.size() != dim)
      throw std::invalid_argument("fit_feature_norm: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) norm.mean[i] += f.values[i];
  }
  for (double& m : norm.mean) m /= static_cast<double>(population.size());
  for (const FlowFeature& f : population)
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = f.values[i] - norm.mean[i];
      norm.stddev[i] += d * d;
    }
  for (double& s : norm.stddev) {
    s = std::sqrt(s / static_cast<double>(population.size()));
    if (s < 1e-8) s = 1e-8;
  }
  return norm;
}

FlowFeature apply_norm(const FeatureNorm& norm, const FlowFeature& f) {
  if (f.size() != norm.mean.size())
    throw std::invalid_argument("apply_norm: dimension mismatch");
  FlowFeature out;
  out.values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out.values[i] = (f.values[i] - norm.mean[i]) / norm.stddev[i];
  return out;
}

std::vector<double> sar_subfeature(const FlowFeature& f) {
  if (f.size() < 2)
    throw std::invalid_argument("sar_subfeature: feature too short");
  return std::vector<double>(f.values.begin(), f.values.end() - 1);
}

}  // namespace tsclab::meta
