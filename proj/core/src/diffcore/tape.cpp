#include "tsclab/diffcore/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsclab::diffcore {

Tape::VarId Tape::push(NumArray value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), NumArray{}, std::move(back), {}});
  return nodes_.size() - 1;
}

NumArray& Tape::grad_buf(VarId id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty() && !n.value.data.empty())
    n.grad = NumArray::zeros(n.value.shape);
  return n.grad;
}

void Tape::require_scalar(VarId id, const char* what) const {
  if (nodes_[id].value.size() != 1)
    throw std::invalid_argument(std::string(what) + ": scalar expected, got " +
                                shape_str(nodes_[id].value.shape));
}

Tape::VarId Tape::input(NumArray value) { return push(std::move(value), {}); }

Tape::VarId Tape::param(const std::string& key, const NumArray& value) {
  auto it = param_ids_.find(key);
  if (it != param_ids_.end())
    throw std::invalid_argument("Tape: parameter '" + key +
                                "' already registered");
  VarId id = push(value, {});
  nodes_[id].param_key = key;
  param_ids_.emplace(key, id);
  return id;
}

std::map<std::string, Tape::VarId> Tape::params(const ParamStore& store) {
  std::map<std::string, VarId> out;
  for (const auto& [key, arr] : store.entries) out.emplace(key, param(key, arr));
  return out;
}

Tape::VarId Tape::dense(VarId w, VarId b, VarId x) {
  const NumArray& wv = nodes_[w].value;
  const NumArray& bv = nodes_[b].value;
  const NumArray& xv = nodes_[x].value;
  if (wv.shape.size() != 2)
    throw std::invalid_argument("dense: weight must be rank 2, got " +
                                shape_str(wv.shape));
  const std::size_t m = wv.shape[0], n = wv.shape[1];
  if (xv.size() != n)
    throw std::invalid_argument("dense: input length " +
                                std::to_string(xv.size()) +
                                " does not match weight " + shape_str(wv.shape));
  if (bv.size() != m)
    throw std::invalid_argument("dense: bias length " +
                                std::to_string(bv.size()) + " != " +
                                std::to_string(m));
  NumArray y = NumArray::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = bv.data[i];
    const double* row = &wv.data[i * n];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv.data[j];
    y.data[i] = acc;
  }
  VarId out = push(std::move(y), {});
  nodes_[out].back = [w, b, x, out, m, n](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    const NumArray& wv2 = t.nodes_[w].value;
    const NumArray& xv2 = t.nodes_[x].value;
    NumArray& gw = t.grad_buf(w);
    NumArray& gb = t.grad_buf(b);
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = gy.data[i];
      if (gi == 0.0) continue;
      gb.data[i] += gi;
      double* gwrow = &gw.data[i * n];
      const double* wrow = &wv2.data[i * n];
      for (std::size_t j = 0; j < n; ++j) {
        gwrow[j] += gi * xv2.data[j];
        gx.data[j] += gi * wrow[j];
      }
    }
  };
  return out;
}

Tape::VarId Tape::conv1d(VarId kernel, VarId bias, VarId x) {
  const NumArray& kv = nodes_[kernel].value;
  const NumArray& bv = nodes_[bias].value;
  const NumArray& xv = nodes_[x].value;
  const std::size_t w = kv.size();
  if (bv.size() != 1)
    throw std::invalid_argument("conv1d: bias must be scalar");
  if (xv.size() < w)
    throw std::invalid_argument("conv1d: input length " +
                                std::to_string(xv.size()) +
                                " shorter than kernel width " +
                                std::to_string(w));
  const std::size_t out_len = xv.size() - w + 1;
  NumArray y = NumArray::zeros({out_len});
  for (std::size_t t = 0; t < out_len; ++t) {
    double acc = bv.data[0];
    for (std::size_t u = 0; u < w; ++u) acc += kv.data[u] * xv.data[t + u];
    y.data[t] = acc;
  }
  VarId out = push(std::move(y), {});
  nodes_[out].back = [kernel, bias, x, out, w, out_len](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    const NumArray& kv2 = t.nodes_[kernel].value;
    const NumArray& xv2 = t.nodes_[x].value;
    NumArray& gk = t.grad_buf(kernel);
    NumArray& gb = t.grad_buf(bias);
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < out_len; ++i) {
      const double gi = gy.data[i];
      if (gi == 0.0) continue;
      gb.data[0] += gi;
      for (std::size_t u = 0; u < w; ++u) {
        gk.data[u] += gi * xv2.data[i + u];
        gx.data[i + u] += gi * kv2.data[u];
      }
    }
  };
  return out;
}

Tape::VarId Tape::sigmoid(VarId x) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out](Tape& t) {
    const NumArray& yv = t.nodes_[out].value;
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < yv.size(); ++i)
      gx.data[i] += gy.data[i] * yv.data[i] * (1.0 - yv.data[i]);
  };
  return out;
}

Tape::VarId Tape::relu(VarId x) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out](Tape& t) {
    const NumArray& xv = t.nodes_[x].value;
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < xv.size(); ++i)
      if (xv.data[i] > 0.0) gx.data[i] += gy.data[i];
  };
  return out;
}

Tape::VarId Tape::abs(VarId x) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v = std::fabs(v);
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out](Tape& t) {
    const NumArray& xv = t.nodes_[x].value;
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv.data[i] > 0.0) gx.data[i] += gy.data[i];
      else if (xv.data[i] < 0.0) gx.data[i] -= gy.data[i];
      // subgradient 0 at the kink
    }
  };
  return out;
}

Tape::VarId Tape::square(VarId x) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v = v * v;
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out](Tape& t) {
    const NumArray& xv = t.nodes_[x].value;
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < xv.size(); ++i)
      gx.data[i] += 2.0 * xv.data[i] * gy.data[i];
  };
  return out;
}

Tape::VarId Tape::add(VarId a, VarId b) {
  const NumArray& av = nodes_[a].value;
  const NumArray& bv = nodes_[b].value;
  if (av.shape != bv.shape)
    throw std::invalid_argument("add: shape mismatch " + shape_str(av.shape) +
                                " vs " + shape_str(bv.shape));
  NumArray y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
  VarId out = push(std::move(y), {});
  nodes_[out].back = [a, b, out](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& ga = t.grad_buf(a);
    NumArray& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga.data[i] += gy.data[i];
      gb.data[i] += gy.data[i];
    }
  };
  return out;
}

Tape::VarId Tape::sub(VarId a, VarId b) {
  const NumArray& av = nodes_[a].value;
  const NumArray& bv = nodes_[b].value;
  if (av.shape != bv.shape)
    throw std::invalid_argument("sub: shape mismatch " + shape_str(av.shape) +
                                " vs " + shape_str(bv.shape));
  NumArray y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= bv.data[i];
  VarId out = push(std::move(y), {});
  nodes_[out].back = [a, b, out](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& ga = t.grad_buf(a);
    NumArray& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga.data[i] += gy.data[i];
      gb.data[i] -= gy.data[i];
    }
  };
  return out;
}

Tape::VarId Tape::mul(VarId a, VarId b) {
  const NumArray& av = nodes_[a].value;
  const NumArray& bv = nodes_[b].value;
  if (av.shape != bv.shape)
    throw std::invalid_argument("mul: shape mismatch " + shape_str(av.shape) +
                                " vs " + shape_str(bv.shape));
  NumArray y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= bv.data[i];
  VarId out = push(std::move(y), {});
  nodes_[out].back = [a, b, out](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    const NumArray& av2 = t.nodes_[a].value;
    const NumArray& bv2 = t.nodes_[b].value;
    NumArray& ga = t.grad_buf(a);
    NumArray& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      ga.data[i] += gy.data[i] * bv2.data[i];
      gb.data[i] += gy.data[i] * av2.data[i];
    }
  };
  return out;
}

Tape::VarId Tape::scale(VarId x, double s) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v *= s;
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out, s](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += s * gy.data[i];
  };
  return out;
}

Tape::VarId Tape::add_const(VarId x, double c) {
  NumArray y = nodes_[x].value;
  for (double& v : y.data) v += c;
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
  };
  return out;
}

Tape::VarId Tape::sum(VarId x) {
  double acc = 0.0;
  for (double v : nodes_[x].value.data) acc += v;
  VarId out = push(NumArray::scalar(acc), {});
  nodes_[out].back = [x, out](Tape& t) {
    const double g = t.nodes_[out].grad.data[0];
    NumArray& gx = t.grad_buf(x);
    for (double& v : gx.data) v += g;
  };
  return out;
}

Tape::VarId Tape::mean(VarId x) {
  const std::size_t n = nodes_[x].value.size();
  if (n == 0) throw std::invalid_argument("mean: empty operand");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Tape::VarId Tape::sum_of(std::span<const VarId> xs) {
  if (xs.empty()) throw std::invalid_argument("sum_of: empty list");
  double acc = 0.0;
  for (VarId v : xs) {
    require_scalar(v, "sum_of");
    acc += nodes_[v].value.data[0];
  }
  std::vector<VarId> parents(xs.begin(), xs.end());
  VarId out = push(NumArray::scalar(acc), {});
  nodes_[out].back = [parents, out](Tape& t) {
    const double g = t.nodes_[out].grad.data[0];
    for (VarId p : parents) t.grad_buf(p).data[0] += g;
  };
  return out;
}

Tape::VarId Tape::mean_of(std::span<const VarId> xs) {
  return scale(sum_of(xs), 1.0 / static_cast<double>(xs.size()));
}

Tape::VarId Tape::pick(VarId x, std::size_t index) {
  const NumArray& xv = nodes_[x].value;
  if (index >= xv.size())
    throw std::invalid_argument("pick: index out of range");
  VarId out = push(NumArray::scalar(xv.data[index]), {});
  nodes_[out].back = [x, out, index](Tape& t) {
    t.grad_buf(x).data[index] += t.nodes_[out].grad.data[0];
  };
  return out;
}

Tape::VarId Tape::slice(VarId x, std::size_t offset, std::size_t len) {
  const NumArray& xv = nodes_[x].value;
  if (offset + len > xv.size())
    throw std::invalid_argument("slice: range out of bounds");
  NumArray y = NumArray::zeros({len});
  std::copy_n(xv.data.begin() + static_cast<std::ptrdiff_t>(offset), len,
              y.data.begin());
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out, offset, len](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < len; ++i) gx.data[offset + i] += gy.data[i];
  };
  return out;
}

Tape::VarId Tape::concat(std::span<const VarId> xs) {
  if (xs.empty()) throw std::invalid_argument("concat: empty list");
  std::size_t total = 0;
  for (VarId v : xs) total += nodes_[v].value.size();
  NumArray y = NumArray::zeros({total});
  std::size_t off = 0;
  for (VarId v : xs) {
    const NumArray& part = nodes_[v].value;
    std::copy(part.data.begin(), part.data.end(), y.data.begin() + off);
    off += part.size();
  }
  std::vector<VarId> parents(xs.begin(), xs.end());
  VarId out = push(std::move(y), {});
  nodes_[out].back = [parents, out](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    std::size_t o = 0;
    for (VarId p : parents) {
      NumArray& gp = t.grad_buf(p);
      for (std::size_t i = 0; i < gp.size(); ++i) gp.data[i] += gy.data[o + i];
      o += gp.size();
    }
  };
  return out;
}

Tape::VarId Tape::adjacent_diff(VarId x) {
  const NumArray& xv = nodes_[x].value;
  if (xv.size() < 2)
    throw std::invalid_argument("adjacent_diff: need at least 2 elements");
  const std::size_t n = xv.size() - 1;
  NumArray y = NumArray::zeros({n});
  for (std::size_t i = 0; i < n; ++i) y.data[i] = xv.data[i + 1] - xv.data[i];
  VarId out = push(std::move(y), {});
  nodes_[out].back = [x, out, n](Tape& t) {
    const NumArray& gy = t.nodes_[out].grad;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < n; ++i) {
      gx.data[i + 1] += gy.data[i];
      gx.data[i] -= gy.data[i];
    }
  };
  return out;
}

Tape::VarId Tape::logsumexp(VarId x) {
  const NumArray& xv = nodes_[x].value;
  if (xv.size() == 0) throw std::invalid_argument("logsumexp: empty operand");
  const double mx = *std::max_element(xv.data.begin(), xv.data.end());
  double acc = 0.0;
  for (double v : xv.data) acc += std::exp(v - mx);
  VarId out = push(NumArray::scalar(mx + std::log(acc)), {});
  nodes_[out].back = [x, out](Tape& t) {
    const double g = t.nodes_[out].grad.data[0];
    const double lse = t.nodes_[out].value.data[0];
    const NumArray& xv2 = t.nodes_[x].value;
    NumArray& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < xv2.size(); ++i)
      gx.data[i] += g * std::exp(xv2.data[i] - lse);
  };
  return out;
}

const NumArray& Tape::grad(VarId id) const {
  if (!ran_backward_)
    throw std::logic_error("Tape::grad: backward() has not run");
  return nodes_[id].grad;
}

void Tape::backward(VarId loss) {
  require_scalar(loss, "backward");
  if (ran_backward_) throw std::logic_error("Tape: backward() already ran");
  ran_backward_ = true;
  grad_buf(loss).data[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.data.empty()) n.back(*this);
  }
}

Grads Tape::param_grads() const {
  if (!ran_backward_)
    throw std::logic_error("Tape::param_grads: backward() has not run");
  Grads g;
  for (const auto& [key, id] : param_ids_) {
    const Node& n = nodes_[id];
    if (n.grad.data.empty())
      g.entries.emplace(key, NumArray::zeros(n.value.shape));
    else
      g.entries.emplace(key, n.grad);
  }
  return g;
}

const NumArray& Tape::grad_of(const std::string& key) const {
  auto it = param_ids_.find(key);
  if (it == param_ids_.end())
    throw std::invalid_argument("Tape::grad_of: parameter '" + key +
                                "' is not part of this graph");
  return grad(it->second);
}

}  // namespace tsclab::diffcore
