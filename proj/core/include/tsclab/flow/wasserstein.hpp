#pragma once

#include "tsclab/flow/matrix.hpp"

namespace tsclab::flow {

// Euclidean distance between two unit-mass normalizations.
double normalized_distance(const FlowMatrix& a, const FlowMatrix& b);

// W-1 distance between the uniform empirical distributions over two
// equal-size flow sets, with ground cost = Euclidean distance between
// normalized matrices. Computed exactly as a minimum-cost perfect matching
// divided by the set size. Rejects unequal sizes and zero-total members.
double exact_wasserstein(const FlowSet& a, const FlowSet& b);

}  // namespace tsclab::flow
