#pragma once

#include <deque>
#include <stdexcept>
#include <vector>

#include "tsclab/rng.hpp"

namespace tsclab::agent {

struct Transition {
  std::vector<double> state;
  int action = 0;  // phase id 0..7
  double reward = 0.0;
  std::vector<double> next_state;
};

// Bounded FIFO of transitions with seeded sampling (without replacement
// within a batch).
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0)
      throw std::invalid_argument("ReplayMemory: capacity must be > 0");
  }

  void push(Transition t) {
    if (buf_.size() == capacity_) buf_.pop_front();
    buf_.push_back(std::move(t));
  }

  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return buf_[i]; }

  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const {
    if (batch > buf_.size())
      throw std::invalid_argument("ReplayMemory: batch larger than contents");
    std::vector<std::size_t> idx(buf_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < batch; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.uniform_int(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(&buf_[idx[i]]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<Transition> buf_;
};

}  // namespace tsclab::agent
