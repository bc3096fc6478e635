#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "tsclab/diffcore/numarray.hpp"
#include "tsclab/rng.hpp"

namespace tsclab::diffcore {

// Named bag of parameter arrays. Plain value type: copies are deep and
// independent, so two stores with equal contents behave identically.
struct ParamStore {
  std::map<std::string, NumArray> entries;
  std::int64_t step_count = 0;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  NumArray& at(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end())
      throw std::invalid_argument("ParamStore: unknown key '" + key + "'");
    return it->second;
  }
  const NumArray& at(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end())
      throw std::invalid_argument("ParamStore: unknown key '" + key + "'");
    return it->second;
  }

  void put(const std::string& key, NumArray value) {
    entries.insert_or_assign(key, std::move(value));
  }

  bool operator==(const ParamStore& other) const {
    return step_count == other.step_count && entries_equal(other);
  }

  bool entries_equal(const ParamStore& other) const {
    if (entries.size() != other.entries.size()) return false;
    auto it = entries.begin();
    auto jt = other.entries.begin();
    for (; it != entries.end(); ++it, ++jt) {
      if (it->first != jt->first) return false;
      if (it->second.shape != jt->second.shape) return false;
      if (it->second.data != jt->second.data) return false;
    }
    return true;
  }
};

// Gradients keyed like the ParamStore they were computed for.
struct Grads {
  std::map<std::string, NumArray> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  const NumArray& at(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end())
      throw std::invalid_argument("Grads: no gradient recorded for '" + key +
                                  "'");
    return it->second;
  }

  void accumulate(const std::string& key, const NumArray& g) {
    auto it = entries.find(key);
    if (it == entries.end()) {
      entries.emplace(key, g);
      return;
    }
    if (it->second.shape != g.shape)
      throw std::invalid_argument("Grads: shape mismatch for '" + key + "'");
    for (std::size_t i = 0; i < g.size(); ++i) it->second.data[i] += g.data[i];
  }

  void scale(double s) {
    for (auto& [k, v] : entries)
      for (double& x : v.data) x *= s;
  }
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
inline NumArray init_uniform(std::vector<std::size_t> shape,
                             std::size_t fan_in, Rng& rng) {
  NumArray a = NumArray::zeros(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : a.data) v = rng.uniform(-bound, bound);
  return a;
}

// Adds weight + bias for a dense layer under keys "<name>.w" / "<name>.b".
inline void init_dense_layer(ParamStore& store, const std::string& name,
                             std::size_t in_dim, std::size_t out_dim,
                             Rng& rng) {
  store.put(name + ".w", init_uniform({out_dim, in_dim}, in_dim, rng));
  store.put(name + ".b", init_uniform({out_dim}, in_dim, rng));
}

inline void init_conv_layer(ParamStore& store, const std::string& name,
                            std::size_t width, Rng& rng) {
  store.put(name + ".w", init_uniform({width}, width, rng));
  store.put(name + ".b", init_uniform({1}, width, rng));
}

}  // namespace tsclab::diffcore
