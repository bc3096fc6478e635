#include "tsclab/diffcore/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace tsclab::diffcore {

std::vector<double> dense_forward(const ParamStore& params,
                                  const std::string& name,
                                  std::span<const double> x) {
  const NumArray& w = params.at(name + ".w");
  const NumArray& b = params.at(name + ".b");
  if (w.shape.size() != 2)
    throw std::invalid_argument("dense_forward: weight must be rank 2");
  const std::size_t m = w.shape[0], n = w.shape[1];
  if (x.size() != n)
    throw std::invalid_argument("dense_forward: input length " +
                                std::to_string(x.size()) +
                                " does not match weight " + shape_str(w.shape));
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = b.data[i];
    const double* row = &w.data[i * n];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> conv1d_forward(const ParamStore& params,
                                   const std::string& name,
                                   std::span<const double> x) {
  const NumArray& k = params.at(name + ".w");
  const NumArray& b = params.at(name + ".b");
  const std::size_t w = k.size();
  if (x.size() < w)
    throw std::invalid_argument("conv1d_forward: input length " +
                                std::to_string(x.size()) +
                                " shorter than kernel width " +
                                std::to_string(w));
  const std::size_t out_len = x.size() - w + 1;
  std::vector<double> y(out_len);
  for (std::size_t t = 0; t < out_len; ++t) {
    double acc = b.data[0];
    for (std::size_t u = 0; u < w; ++u) acc += k.data[u] * x[t + u];
    y[t] = sigmoid_scalar(acc);
  }
  return y;
}

double sigmoid_scalar(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void relu_inplace(std::vector<double>& v) {
  for (double& x : v)
    if (x < 0.0) x = 0.0;
}

void sigmoid_inplace(std::vector<double>& v) {
  for (double& x : v) x = sigmoid_scalar(x);
}

}  // namespace tsclab::diffcore
