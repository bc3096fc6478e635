#pragma once

#include <map>
#include <span>
#include <vector>

#include "tsclab/diffcore/param_store.hpp"
#include "tsclab/diffcore/tape.hpp"
#include "tsclab/rng.hpp"

namespace tsclab::flowgen {

using diffcore::NumArray;
using diffcore::ParamStore;
using diffcore::Tape;

// Critic scoring a scaled |R| x T flow matrix: the same two width-5
// sigmoid conv layers run over each route's count vector, the per-route
// embeddings (length T-8) are concatenated, and a final dense layer maps
// them to one real score. Needs T >= 9.
struct CriticNet {
  int routes = 0;
  int time_bins = 0;
  ParamStore params;  // conv1.{w,b}, conv2.{w,b}, out.{w,b}

  static CriticNet init(int routes, int time_bins, Rng& rng);

  int embed_len() const { return time_bins - 8; }

  // x: scaled counts, row-major R*T.
  double forward(std::span<const double> x) const;
  Tape::VarId build(Tape& tape,
                    const std::map<std::string, Tape::VarId>& pv,
                    Tape::VarId x) const;

  void clip_weights(double c);
  double max_abs_weight() const;
};

// Noise -> scaled flow matrix: dense+ReLU then a linear dense producing
// R*T raw outputs.
struct GeneratorNet {
  int routes = 0;
  int time_bins = 0;
  int noise_dim = 16;
  int hidden = 64;
  ParamStore params;  // fc1.{w,b}, fc2.{w,b}

  static GeneratorNet init(int routes, int time_bins, int noise_dim,
                           int hidden, Rng& rng);

  std::vector<double> forward(std::span<const double> z) const;
  Tape::VarId build(Tape& tape,
                    const std::map<std::string, Tape::VarId>& pv,
                    Tape::VarId z) const;
};

}  // namespace tsclab::flowgen
