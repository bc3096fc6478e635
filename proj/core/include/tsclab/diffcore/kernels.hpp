#pragma once

#include <span>
#include <vector>

#include "tsclab/diffcore/param_store.hpp"

namespace tsclab::diffcore {

// Tape-free forward kernels. These must agree exactly with the taped ops;
// they exist so the hot paths (simulation rollouts, sampling) skip graph
// recording.

// y = W x + b for the layer stored under "<name>.w"/"<name>.b".
std::vector<double> dense_forward(const ParamStore& params,
                                  const std::string& name,
                                  std::span<const double> x);

// Valid-mode width-5-style correlation (any width stored in "<name>.w"),
// stride 1, followed by elementwise sigmoid.
std::vector<double> conv1d_forward(const ParamStore& params,
                                   const std::string& name,
                                   std::span<const double> x);

double sigmoid_scalar(double v);

void relu_inplace(std::vector<double>& v);
void sigmoid_inplace(std::vector<double>& v);

}  // namespace tsclab::diffcore
