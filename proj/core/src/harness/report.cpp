#include "tsclab/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tsclab::harness {

Improvement relative_improvement(double baseline_att, double ours_att,
                                 double freeflow_att) {
  if (baseline_att <= freeflow_att)
    throw std::invalid_argument(
        "relative_improvement: baseline must exceed the free-flow bound");
  Improvement imp;
  imp.raw = (baseline_att - ours_att) / baseline_att;
  imp.relative = (baseline_att - ours_att) / (baseline_att - freeflow_att);
  return imp;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Seq, typename T>
int index_of(const Seq& seq, const T& v) {
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (seq[i] == v) return static_cast<int>(i);
  return -1;
}

}  // namespace

ReportTable report_table(const std::vector<ResultRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("report_table: need at least one record");

  ReportTable t;
  for (const ResultRecord& r : records) {
    if (index_of(t.labels, r.label) < 0) t.labels.push_back(r.label);
    if (index_of(t.methods, r.method) < 0) t.methods.push_back(r.method);
  }

  // Pool per-flow travel times across seeds.
  std::vector<std::vector<std::vector<double>>> pooled(
      t.methods.size(), std::vector<std::vector<double>>(t.labels.size()));
  std::vector<std::vector<double>> ff_pool(t.labels.size());
  for (const ResultRecord& r : records) {
    if (!r.error.empty()) continue;
    const int m = index_of(t.methods, r.method);
    const int l = index_of(t.labels, r.label);
    auto& bucket = pooled[m][l];
    bucket.insert(bucket.end(), r.flow_att.begin(), r.flow_att.end());
    ff_pool[l].push_back(r.freeflow);
  }

  t.cells.assign(t.methods.size(),
                 std::vector<std::array<double, 3>>(
                     t.labels.size(), {kNaN, kNaN, kNaN}));
  for (std::size_t m = 0; m < t.methods.size(); ++m)
    for (std::size_t l = 0; l < t.labels.size(); ++l) {
      const auto& bucket = pooled[m][l];
      if (bucket.empty()) continue;
      double mx = bucket[0], mn = bucket[0], sum = 0.0;
      for (double v : bucket) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        sum += v;
      }
      t.cells[m][l] = {mx, mn, sum / bucket.size()};
    }
  t.freeflow.assign(t.labels.size(), {kNaN, kNaN, kNaN});
  for (std::size_t l = 0; l < t.labels.size(); ++l) {
    if (ff_pool[l].empty()) continue;
    double mx = ff_pool[l][0], mn = ff_pool[l][0], sum = 0.0;
    for (double v : ff_pool[l]) {
      mx = std::max(mx, v);
      mn = std::min(mn, v);
      sum += v;
    }
    t.freeflow[l] = {mx, mn, sum / ff_pool[l].size()};
  }

  // Improvement rows when generalight plus at least one baseline exist.
  const int ours = index_of(t.methods, std::string("generalight"));
  t.best_baseline.assign(t.labels.size(), "");
  t.improvement_raw.assign(t.labels.size(), {kNaN, kNaN, kNaN});
  t.improvement_relative.assign(t.labels.size(), {kNaN, kNaN, kNaN});
  if (ours >= 0) {
    for (std::size_t l = 0; l < t.labels.size(); ++l) {
      int best = -1;
      for (std::size_t m = 0; m < t.methods.size(); ++m) {
        if (static_cast<int>(m) == ours || std::isnan(t.cells[m][l][2]))
          continue;
        if (best < 0 || t.cells[m][l][2] < t.cells[best][l][2] ||
            (t.cells[m][l][2] == t.cells[best][l][2] &&
             t.methods[m] < t.methods[best]))
          best = static_cast<int>(m);
      }
      if (best < 0 || std::isnan(t.cells[ours][l][2])) continue;
      t.best_baseline[l] = t.methods[best];
      for (int c = 0; c < 3; ++c) {
        const double base = t.cells[best][l][c];
        const double mine = t.cells[ours][l][c];
        const double ff = t.freeflow[l][2];
        if (std::isnan(base) || std::isnan(mine) || std::isnan(ff) ||
            base <= ff)
          continue;
        const Improvement imp = relative_improvement(base, mine, ff);
        t.improvement_raw[l][c] = imp.raw;
        t.improvement_relative[l][c] = imp.relative;
        t.has_improvement = true;
      }
    }
  }
  return t;
}

namespace {

std::string cell3(const std::array<double, 3>& c, bool percent) {
  char buf[96];
  if (std::isnan(c[0]) && std::isnan(c[1]) && std::isnan(c[2]))
    return "      -       -       - ";
  if (percent)
    std::snprintf(buf, sizeof buf, "%6.1f%% %6.1f%% %6.1f%%", c[0] * 100.0,
                  c[1] * 100.0, c[2] * 100.0);
  else
    std::snprintf(buf, sizeof buf, "%7.1f %7.1f %7.1f", c[0], c[1], c[2]);
  return buf;
}

}  // namespace

std::string ReportTable::formatted() const {
  std::ostringstream out;
  out << std::left;
  auto row_name = [&](const std::string& name) {
    out << name;
    for (std::size_t i = name.size(); i < 22; ++i) out << ' ';
  };
  row_name("method");
  for (const std::string& l : labels) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "| %-22s", (l + " (max/min/mean)").c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    row_name(methods[m]);
    for (std::size_t l = 0; l < labels.size(); ++l)
      out << "| " << cell3(cells[m][l], false) << ' ';
    out << "\n";
  }
  if (has_improvement) {
    row_name("improvement(raw)");
    for (std::size_t l = 0; l < labels.size(); ++l)
      out << "| " << cell3(improvement_raw[l], true) << ' ';
    out << "\n";
    row_name("improvement(rel-ff)");
    for (std::size_t l = 0; l < labels.size(); ++l)
      out << "| " << cell3(improvement_relative[l], true) << ' ';
    out << "\n";
  }
  row_name("freeflow");
  for (std::size_t l = 0; l < labels.size(); ++l)
    out << "| " << cell3(freeflow[l], false) << ' ';
  out << "\n";
  return out.str();
}

void write_table_csv(const std::string& path, const ReportTable& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "method";
  for (const std::string& l : table.labels)
    f << ',' << l << "_max," << l << "_min," << l << "_mean";
  f << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f << ',' << buf;
  };
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    f << table.methods[m];
    for (std::size_t l = 0; l < table.labels.size(); ++l)
      for (int c = 0; c < 3; ++c) put(table.cells[m][l][c]);
    f << '\n';
  }
  if (table.has_improvement) {
    f << "improvement_raw";
    for (std::size_t l = 0; l < table.labels.size(); ++l)
      for (int c = 0; c < 3; ++c) put(table.improvement_raw[l][c]);
    f << '\n';
    f << "improvement_relative";
    for (std::size_t l = 0; l < table.labels.size(); ++l)
      for (int c = 0; c < 3; ++c) put(table.improvement_relative[l][c]);
    f << '\n';
  }
  f << "freeflow";
  for (std::size_t l = 0; l < table.labels.size(); ++l)
    for (int c = 0; c < 3; ++c) put(table.freeflow[l][c]);
  f << '\n';
}

}  // namespace tsclab::harness
