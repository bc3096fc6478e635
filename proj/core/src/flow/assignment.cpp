#include "tsclab/flow/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace tsclab::flow {

AssignmentResult solve_assignment(const std::vector<double>& cost, int n) {
  if (n < 1) throw std::invalid_argument("solve_assignment: n must be >= 1");
  if (cost.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("solve_assignment: cost matrix size mismatch");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto a = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };

  // 1-based potentials; p[j] = row matched to column j (0 = none yet).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult res;
  res.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) res.row_to_col[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) res.total_cost += a(i, res.row_to_col[i]);
  return res;
}

}  // namespace tsclab::flow
