#pragma once

#include <iosfwd>
#include <string>

#include "tsclab/flow/matrix.hpp"

namespace tsclab::flow {

// Flow matrix text format "tscflow-v1":
//   tscflow-v1
//   routes <R>
//   T <T>
//   interval <seconds>
//   route <id> <lane-id> <lane-id> ...       (R lines)
//   matrix
//   <T integers>                             (R rows)
void save_flow_matrix(std::ostream& out, const FlowMatrix& m);
FlowMatrix load_flow_matrix(std::istream& in);
void save_flow_matrix_file(const std::string& path, const FlowMatrix& m);
FlowMatrix load_flow_matrix_file(const std::string& path);

// A FlowSet on disk is a directory of tscflow files plus manifest.json
// ({version, provenance, files[]}).
void save_flow_set(const std::string& dir, const FlowSet& set);
FlowSet load_flow_set(const std::string& dir);

}  // namespace tsclab::flow
