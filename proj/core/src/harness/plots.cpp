#include "tsclab/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tsclab::harness {

namespace fs = std::filesystem;

void write_series_csv(const std::string& path,
                      const std::vector<agent::TickSample>& series) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "tick,on_road,running_att\n";
  char buf[96];
  for (const agent::TickSample& s : series) {
    std::snprintf(buf, sizeof buf, "%ld,%d,%.9g\n", s.tick, s.on_road,
                  s.running_att);
    f << buf;
  }
}

std::vector<agent::TickSample> read_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<agent::TickSample> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    agent::TickSample s;
    if (std::sscanf(line.c_str(), "%ld,%d,%lf", &s.tick, &s.on_road,
                    &s.running_att) != 3)
      throw std::runtime_error(path + ": malformed series row");
    out.push_back(s);
  }
  return out;
}

void write_decision_csv(const std::string& path,
                        const std::vector<agent::DecisionLog>& log) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "tick,intersection,action,reward\n";
  char buf[96];
  for (const agent::DecisionLog& d : log) {
    std::snprintf(buf, sizeof buf, "%ld,%d,%d,%.9g\n", d.tick, d.intersection,
                  d.action, d.reward);
    f << buf;
  }
}

void render_line_chart_svg(const std::string& path, const std::string& title,
                           const std::vector<ChartSeries>& series) {
  constexpr int kW = 640, kH = 400, kPad = 48;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const ChartSeries& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto sx = [&](double x) {
    return kPad + (x - xmin) / (xmax - xmin) * (kW - 2 * kPad);
  };
  auto sy = [&](double y) {
    return kH - kPad - (y - ymin) / (ymax - ymin) * (kH - 2 * kPad);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#ff7f0e", "#9467bd", "#8c564b"};
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='"
    << kH << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  f << "<text x='" << kW / 2 << "' y='20' text-anchor='middle' "
    << "font-family='sans-serif' font-size='14'>" << title << "</text>\n";
  // axes
  f << "<line x1='" << kPad << "' y1='" << kH - kPad << "' x2='" << kW - kPad
    << "' y2='" << kH - kPad << "' stroke='black'/>\n";
  f << "<line x1='" << kPad << "' y1='" << kPad << "' x2='" << kPad << "' y2='"
    << kH - kPad << "' stroke='black'/>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", ymax);
  f << "<text x='4' y='" << kPad << "' font-family='sans-serif' "
    << "font-size='10'>" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", ymin);
  f << "<text x='4' y='" << kH - kPad << "' font-family='sans-serif' "
    << "font-size='10'>" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.4g", xmax);
  f << "<text x='" << kW - kPad << "' y='" << kH - kPad + 14
    << "' font-family='sans-serif' font-size='10'>" << buf << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const ChartSeries& s = series[si];
    if (s.x.empty()) continue;
    f << "<polyline fill='none' stroke='" << kColors[si % 6]
      << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", sx(s.x[i]), sy(s.y[i]));
      f << buf;
    }
    f << "'/>\n";
    f << "<text x='" << kW - kPad + 2 << "' y='" << kPad + 14 * si
      << "' font-family='sans-serif' font-size='10' fill='" << kColors[si % 6]
      << "'>" << s.name << "</text>\n";
  }
  f << "</svg>\n";
}

void emit_plots(const std::string& trace_dir, const std::string& plots_dir) {
  fs::create_directories(plots_dir);
  if (!fs::exists(trace_dir)) return;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trace_dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    const std::vector<agent::TickSample> series = read_series_csv(file.string());
    ChartSeries count, att;
    count.name = "vehicles on road";
    att.name = "running att";
    for (const agent::TickSample& s : series) {
      count.x.push_back(static_cast<double>(s.tick));
      count.y.push_back(static_cast<double>(s.on_road));
      att.x.push_back(static_cast<double>(s.tick));
      att.y.push_back(s.running_att);
    }
    const std::string stem = file.stem().string();
    render_line_chart_svg(
        (fs::path(plots_dir) / (stem + "_count.svg")).string(),
        stem + ": real-time vehicle count", {count});
    render_line_chart_svg((fs::path(plots_dir) / (stem + "_att.svg")).string(),
                          stem + ": real-time average travel time", {att});
  }
}

}  // namespace tsclab::harness
