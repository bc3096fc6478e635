#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tsclab/diffcore/numarray.hpp"
#include "tsclab/diffcore/param_store.hpp"

namespace tsclab::diffcore {

// Reverse-mode differentiation over a recorded computation graph. Nodes are
// appended in forward order; backward() walks them in reverse, so creation
// order doubles as the topological order. One tape per loss evaluation.
class Tape {
 public:
  using VarId = std::size_t;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a constant; no gradient is reported for it.
  VarId input(NumArray value);
  // Leaf registered under a parameter key; its gradient lands in grads().
  VarId param(const std::string& key, const NumArray& value);
  // All entries of a store at once.
  std::map<std::string, VarId> params(const ParamStore& store);

  // y = W x + b, W:[m,n], x:[n], b:[m].
  VarId dense(VarId w, VarId b, VarId x);
  // Valid-mode sliding window, stride 1: y[t] = sum_u k[u] x[t+u] + bias.
  VarId conv1d(VarId kernel, VarId bias, VarId x);

  VarId sigmoid(VarId x);
  VarId relu(VarId x);
  VarId abs(VarId x);
  VarId square(VarId x);

  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId mul(VarId a, VarId b);  // elementwise
  VarId scale(VarId x, double s);
  VarId add_const(VarId x, double c);

  VarId sum(VarId x);   // scalar
  VarId mean(VarId x);  // scalar
  // Mean of scalar vars (batch reduction with a fixed summation order).
  VarId mean_of(std::span<const VarId> xs);
  VarId sum_of(std::span<const VarId> xs);

  VarId pick(VarId x, std::size_t index);                    // scalar x[i]
  VarId slice(VarId x, std::size_t offset, std::size_t len); // contiguous
  VarId concat(std::span<const VarId> xs);
  VarId adjacent_diff(VarId x);  // y[t] = x[t+1] - x[t]
  VarId logsumexp(VarId x);      // scalar, numerically stable

  const NumArray& value(VarId id) const { return nodes_[id].value; }
  const NumArray& grad(VarId id) const;

  // Seeds d(loss)/d(loss)=1 and propagates. `loss` must be scalar.
  void backward(VarId loss);

  // Gradients of every parameter leaf touched by the loss, keyed by name.
  Grads param_grads() const;
  // Gradient for one key; rejects keys never registered on this tape.
  const NumArray& grad_of(const std::string& key) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    NumArray value;
    NumArray grad;  // allocated lazily during backward
    std::function<void(Tape&)> back;
    std::string param_key;  // empty unless a parameter leaf
  };

  VarId push(NumArray value, std::function<void(Tape&)> back);
  NumArray& grad_buf(VarId id);
  void require_scalar(VarId id, const char* what) const;

  std::vector<Node> nodes_;
  std::map<std::string, VarId> param_ids_;
  bool ran_backward_ = false;
};

}  // namespace tsclab::diffcore
