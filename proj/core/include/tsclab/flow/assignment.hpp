#pragma once

#include <vector>

namespace tsclab::flow {

struct AssignmentResult {
  std::vector<int> row_to_col;  // row i is matched to column row_to_col[i]
  double total_cost = 0.0;
};

// Exact minimum-cost perfect matching on a dense n x n cost matrix
// (row-major), via the O(n^3) potential/augmenting-path method.
AssignmentResult solve_assignment(const std::vector<double>& cost, int n);

}  // namespace tsclab::flow
