#include "tsclab/flow/wasserstein.hpp"

#include <cmath>
#include <stdexcept>

#include "tsclab/flow/assignment.hpp"

namespace tsclab::flow {

double normalized_distance(const FlowMatrix& a, const FlowMatrix& b) {
  const std::vector<double> na = normalize(a);
  const std::vector<double> nb = normalize(b);
  if (na.size() != nb.size())
    throw std::invalid_argument("normalized_distance: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < na.size(); ++i) {
    const double d = na[i] - nb[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double exact_wasserstein(const FlowSet& a, const FlowSet& b) {
  if (a.size() != b.size())
    throw std::invalid_argument(
        "exact_wasserstein: sets must have equal sample counts");
  if (a.size() == 0)
    throw std::invalid_argument("exact_wasserstein: empty sets");
  const int n = static_cast<int>(a.size());

  std::vector<std::vector<double>> na(n), nb(n);
  for (int i = 0; i < n; ++i) {
    na[i] = normalize(a.members[i]);
    nb[i] = normalize(b.members[i]);
    if (na[i].size() != nb[i].size())
      throw std::invalid_argument("exact_wasserstein: member shape mismatch");
  }

  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < na[i].size(); ++k) {
        const double d = na[i][k] - nb[j][k];
        acc += d * d;
      }
      cost[static_cast<std::size_t>(i) * n + j] = std::sqrt(acc);
    }
  }

  return solve_assignment(cost, n).total_cost / static_cast<double>(n);
}

}  // namespace tsclab::flow
