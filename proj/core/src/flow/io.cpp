#include "tsclab/flow/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsclab::flow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
[[noreturn]] void parse_fail(const std::string& what) {
  throw std::runtime_error("tscflow: " + what);
}
}  // namespace

void save_flow_matrix(std::ostream& out, const FlowMatrix& m) {
  out << "tscflow-v1\n";
  out << "routes " << m.route_count() << "\n";
  out << "T " << m.time_bins << "\n";
  out << "interval " << m.interval << "\n";
  for (const Route& r : m.routes) {
    out << "route " << r.id;
    for (const std::string& lane : r.lanes) out << ' ' << lane;
    out << "\n";
  }
  out << "matrix\n";
  for (int r = 0; r < m.route_count(); ++r) {
    for (int t = 0; t < m.time_bins; ++t) {
      if (t) out << ' ';
      out << m.at(r, t);
    }
    out << "\n";
  }
}

FlowMatrix load_flow_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "tscflow-v1")
    parse_fail("bad or missing header");
  int route_n = 0, t_bins = 0, interval = 0;
  std::string tag;
  {
    std::getline(in, line);
    std::istringstream ss(line);
    if (!(ss >> tag >> route_n) || tag != "routes") parse_fail("routes line");
  }
  {
    std::getline(in, line);
    std::istringstream ss(line);
    if (!(ss >> tag >> t_bins) || tag != "T") parse_fail("T line");
  }
  {
    std::getline(in, line);
    std::istringstream ss(line);
    if (!(ss >> tag >> interval) || tag != "interval") parse_fail("interval line");
  }
  std::vector<Route> routes;
  for (int r = 0; r < route_n; ++r) {
    if (!std::getline(in, line)) parse_fail("missing route line");
    std::istringstream ss(line);
    Route route;
    if (!(ss >> tag >> route.id) || tag != "route") parse_fail("route line");
    std::string lane;
    while (ss >> lane) route.lanes.push_back(lane);
    routes.push_back(std::move(route));
  }
  if (!std::getline(in, line) || line != "matrix") parse_fail("matrix marker");
  FlowMatrix m(std::move(routes), t_bins, interval);
  for (int r = 0; r < route_n; ++r) {
    if (!std::getline(in, line)) parse_fail("missing matrix row");
    std::istringstream ss(line);
    for (int t = 0; t < t_bins; ++t)
      if (!(ss >> m.at(r, t))) parse_fail("short matrix row");
  }
  m.validate();
  return m;
}

void save_flow_matrix_file(const std::string& path, const FlowMatrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  save_flow_matrix(f, m);
}

FlowMatrix load_flow_matrix_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return load_flow_matrix(f);
}

void save_flow_set(const std::string& dir, const FlowSet& set) {
  set.validate();
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = "tscflow-v1";
  manifest["provenance"] = set.provenance;
  json files = json::array();
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "flow_%04zu.tscflow", i);
    save_flow_matrix_file((fs::path(dir) / name).string(), set.members[i]);
    files.push_back(name);
  }
  manifest["files"] = std::move(files);
  std::ofstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest in " + dir);
  f << manifest.dump(2) << "\n";
}

FlowSet load_flow_set(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("missing manifest.json in " + dir);
  json manifest;
  f >> manifest;
  if (manifest.value("version", "") != "tscflow-v1")
    throw std::runtime_error(dir + ": bad manifest version");
  FlowSet set;
  set.provenance = manifest.value("provenance", "real");
  for (const json& name : manifest.at("files"))
    set.members.push_back(load_flow_matrix_file(
        (fs::path(dir) / name.get<std::string>()).string()));
  set.validate();
  return set;
}

}  // namespace tsclab::flow
