#pragma once

#include <string>
#include <vector>

namespace diffu::report {

enum class AxisScale { kAuto, kLinear, kLog };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // draw points instead of a polyline
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  AxisScale x_scale = AxisScale::kAuto;
  AxisScale y_scale = AxisScale::kAuto;
  int width = 720;
  int height = 480;
};

/// Log axes are chosen automatically when every value is positive and the
/// data span more than two decades.
bool wants_log_axis(const std::vector<double>& values);

/// Self-contained SVG line chart: axes, ticks, legend, one polyline per
/// series. Non-finite points (and non-positive ones on log axes) break the
/// line.
std::string render_svg(const std::vector<Series>& series, const ChartOptions& opt);
void write_svg(const std::string& path, const std::vector<Series>& series, const ChartOptions& opt);

std::string xml_escape(const std::string& s);

}  // namespace diffu::report
