#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsclab::diffcore {

// Dense row-major array of doubles, rank 0..2 in practice.
struct NumArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  NumArray() = default;
  NumArray(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (element_count(shape) != data.size())
      throw std::invalid_argument("NumArray: shape/data size mismatch");
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  static NumArray zeros(std::vector<std::size_t> s) {
    std::size_t n = element_count(s);
    return NumArray(std::move(s), std::vector<double>(n, 0.0));
  }

  static NumArray scalar(double v) { return NumArray({1}, {v}); }

  static NumArray vec(std::vector<double> d) {
    std::vector<std::size_t> s{d.size()};
    return NumArray(std::move(s), std::move(d));
  }

  static NumArray matrix(std::size_t rows, std::size_t cols,
                         std::vector<double> d) {
    return NumArray({rows, cols}, std::move(d));
  }

  std::size_t size() const { return data.size(); }

  double& at(std::size_t r, std::size_t c) {
    return data[r * shape.at(1) + c];
  }
  double at(std::size_t r, std::size_t c) const {
    return data[r * shape.at(1) + c];
  }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const NumArray& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

}  // namespace tsclab::diffcore
