#pragma once

#include <array>
#include <string>
#include <vector>

#include "tsclab/harness/experiment.hpp"

namespace tsclab::harness {

struct Improvement {
  double raw = 0.0;       // (baseline - ours) / baseline
  double relative = 0.0;  // (baseline - ours) / (baseline - freeflow)
};

// Rejects a degenerate denominator (baseline <= freeflow).
Improvement relative_improvement(double baseline_att, double ours_att,
                                 double freeflow_att);

// Table-1 shape: method rows, one (max, min, mean) column triple per test
// distribution, pooled across seeds; improvement rows against the best
// baseline (lowest mean per distribution, lexicographic name tie-break).
struct ReportTable {
  std::vector<std::string> labels;
  std::vector<std::string> methods;
  // cells[m][l] = {max, min, mean}; quiet-NaN when the cell is missing.
  std::vector<std::vector<std::array<double, 3>>> cells;
  std::vector<std::array<double, 3>> freeflow;      // per label
  std::vector<std::string> best_baseline;           // per label
  std::vector<std::array<double, 3>> improvement_raw;
  std::vector<std::array<double, 3>> improvement_relative;
  bool has_improvement = false;

  std::string formatted() const;
};

ReportTable report_table(const std::vector<ResultRecord>& records);

void write_table_csv(const std::string& path, const ReportTable& table);

}  // namespace tsclab::harness
