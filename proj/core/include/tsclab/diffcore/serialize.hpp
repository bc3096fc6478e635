#pragma once

#include <iosfwd>
#include <string>

#include "tsclab/diffcore/param_store.hpp"

namespace tsclab::diffcore {

// Self-describing text format, header "diffcore-params v1":
//   diffcore-params v1
//   steps <n>
//   param <key>
//   shape <d0> <d1> ...
//   values <v0> <v1> ...        (row-major, %.17g, exact round-trip)
void save_params(std::ostream& out, const ParamStore& store);
ParamStore load_params(std::istream& in);

void save_params_file(const std::string& path, const ParamStore& store);
ParamStore load_params_file(const std::string& path);

}  // namespace tsclab::diffcore
