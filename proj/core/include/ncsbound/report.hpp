#pragma once

// Minimal SVG line charts for the report files. Nothing interactive.

#include <string>
#include <vector>

namespace ncsbound::report {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Shade {
  double x0 = 0.0;
  double x1 = 0.0;
  std::string color = "#f4cccc";
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  double width = 760.0;
  double height = 440.0;
  std::vector<Series> series;
  std::vector<Shade> shades;
};

/// Non-finite points (and non-positive ones on log axes) are skipped.
std::string render_svg(const Chart& chart);

/// Writes `content` to `path`, creating parent directories. Throws Error.
void write_file(const std::string& path, const std::string& content);

}  // namespace ncsbound::report
