#pragma once

#include <string>
#include <vector>

#include "tsclab/agent/episode.hpp"

namespace tsclab::harness {

// Per-tick series CSV: tick,on_road,running_att.
void write_series_csv(const std::string& path,
                      const std::vector<agent::TickSample>& series);
std::vector<agent::TickSample> read_series_csv(const std::string& path);

// Decision log CSV: tick,intersection,action,reward.
void write_decision_csv(const std::string& path,
                        const std::vector<agent::DecisionLog>& log);

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal standalone SVG line chart.
void render_line_chart_svg(const std::string& path, const std::string& title,
                           const std::vector<ChartSeries>& series);

// Reads every trace CSV in `trace_dir` and renders vehicle-count and
// running-travel-time line charts into `plots_dir`.
void emit_plots(const std::string& trace_dir, const std::string& plots_dir);

}  // namespace tsclab::harness
