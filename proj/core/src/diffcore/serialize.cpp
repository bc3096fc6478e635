#include "tsclab/diffcore/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tsclab::diffcore {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(const std::string& what) {
  throw std::runtime_error("diffcore-params: " + what);
}

}  // namespace

void save_params(std::ostream& out, const ParamStore& store) {
  out << "diffcore-params v1\n";
  out << "steps " << store.step_count << "\n";
  for (const auto& [key, arr] : store.entries) {
    out << "param " << key << "\n";
    out << "shape";
    for (std::size_t d : arr.shape) out << ' ' << d;
    out << "\n";
    out << "values";
    for (double v : arr.data) out << ' ' << fmt_double(v);
    out << "\n";
  }
}

ParamStore load_params(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "diffcore-params v1")
    parse_fail("bad or missing header line");
  ParamStore store;
  if (!std::getline(in, line)) parse_fail("missing steps line");
  {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag >> store.step_count) || tag != "steps")
      parse_fail("malformed steps line");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag, key;
    if (!(ss >> tag >> key) || tag != "param")
      parse_fail("expected 'param <key>', got '" + line + "'");

    if (!std::getline(in, line)) parse_fail("missing shape for '" + key + "'");
    std::istringstream shape_ss(line);
    if (!(shape_ss >> tag) || tag != "shape") parse_fail("malformed shape line");
    std::vector<std::size_t> shape;
    std::size_t d;
    while (shape_ss >> d) shape.push_back(d);

    if (!std::getline(in, line)) parse_fail("missing values for '" + key + "'");
    std::istringstream val_ss(line);
    if (!(val_ss >> tag) || tag != "values") parse_fail("malformed values line");
    std::vector<double> data;
    data.reserve(NumArray::element_count(shape));
    double v;
    while (val_ss >> v) data.push_back(v);
    if (data.size() != NumArray::element_count(shape))
      parse_fail("value count does not match shape for '" + key + "'");
    store.put(key, NumArray(std::move(shape), std::move(data)));
  }
  return store;
}

void save_params_file(const std::string& path, const ParamStore& store) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  save_params(f, store);
  if (!f) throw std::runtime_error("write failed: " + path);
}

ParamStore load_params_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return load_params(f);
}

}  // namespace tsclab::diffcore
