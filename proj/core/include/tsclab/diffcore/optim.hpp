#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "tsclab/diffcore/param_store.hpp"

namespace tsclab::diffcore {

enum class OptRule { plain_gradient, adaptive_rms };

// Gradient-descent stepper. plain_gradient is stateless (p -= lr*g);
// adaptive_rms keeps a running squared-gradient average per key:
//   ms = 0.9*ms + 0.1*g^2 ; p -= lr * g / (sqrt(ms) + 1e-8)
class Optimizer {
 public:
  static constexpr double kRmsDecay = 0.9;
  static constexpr double kRmsEpsilon = 1e-8;

  Optimizer(OptRule rule, double lr) : rule_(rule), lr_(lr) {
    if (lr <= 0.0) throw std::invalid_argument("Optimizer: lr must be > 0");
  }

  OptRule rule() const { return rule_; }
  double learning_rate() const { return lr_; }

  void step(ParamStore& params, const Grads& grads) {
    for (auto& [key, p] : params.entries) {
      auto it = grads.entries.find(key);
      if (it == grads.entries.end()) continue;  // untouched by this loss
      const NumArray& g = it->second;
      if (g.shape != p.shape)
        throw std::invalid_argument("Optimizer: gradient shape mismatch for '" +
                                    key + "'");
      if (rule_ == OptRule::plain_gradient) {
        for (std::size_t i = 0; i < p.size(); ++i)
          p.data[i] -= lr_ * g.data[i];
      } else {
        NumArray& ms = rms_state(key, p);
        for (std::size_t i = 0; i < p.size(); ++i) {
          ms.data[i] = kRmsDecay * ms.data[i] +
                       (1.0 - kRmsDecay) * g.data[i] * g.data[i];
          p.data[i] -= lr_ * g.data[i] / (std::sqrt(ms.data[i]) + kRmsEpsilon);
        }
      }
    }
    ++params.step_count;
  }

 private:
  NumArray& rms_state(const std::string& key, const NumArray& like) {
    auto it = state_.find(key);
    if (it == state_.end())
      it = state_.emplace(key, NumArray::zeros(like.shape)).first;
    return it->second;
  }

  OptRule rule_;
  double lr_;
  std::map<std::string, NumArray> state_;
};

// One-shot step with the plain rule; convenience for inner-loop updates.
inline void plain_gradient_step(ParamStore& params, const Grads& grads,
                                double lr) {
  Optimizer(OptRule::plain_gradient, lr).step(params, grads);
}

}  // namespace tsclab::diffcore
