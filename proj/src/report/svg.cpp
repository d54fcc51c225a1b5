#include "diffu/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "diffu/report/csv.hpp"

namespace diffu::report {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;
  double px_lo = 0.0;
  double px_hi = 1.0;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double t(double v) const { return log ? std::log10(v) : v; }
  double map(double v) const { return px_lo + (t(v) - t(lo)) / (t(hi) - t(lo)) * (px_hi - px_lo); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

Axis make_axis(const std::vector<double>& values, AxisScale scale) {
  Axis a;
  a.log = scale == AxisScale::kLog || (scale == AxisScale::kAuto && wants_log_axis(values));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!a.usable(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) {
    lo = a.log ? 1.0 : 0.0;
    hi = a.log ? 10.0 : 1.0;
  }
  if (a.log) {
    lo = std::pow(10.0, std::floor(std::log10(lo)));
    hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (hi <= lo) hi = lo * 10.0;
  } else if (hi - lo <= 0.0) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const int d0 = static_cast<int>(std::lround(std::log10(a.lo)));
    const int d1 = static_cast<int>(std::lround(std::log10(a.hi)));
    const int step = std::max(1, (d1 - d0) / 8);
    for (int d = d0; d <= d1; d += step) out.push_back(std::pow(10.0, d));
    return out;
  }
  const double raw = (a.hi - a.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

bool wants_log_axis(const std::vector<double>& values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (v <= 0.0) return false;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    any = true;
  }
  return any && hi / lo > 100.0;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series, const ChartOptions& opt) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const double left = 80, right = 170, top = 40, bottom = 60;
  Axis ax = make_axis(xs, opt.x_scale);
  Axis ay = make_axis(ys, opt.y_scale);
  ax.px_lo = left;
  ax.px_hi = opt.width - right;
  ay.px_lo = opt.height - bottom;
  ay.px_hi = top;

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
    << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    o << "<text x=\"" << num((ax.px_lo + ax.px_hi) / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(opt.title) << "</text>\n";
  }
  o << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : ticks(ax)) o << "<line x1=\"" << num(ax.map(t)) << "\" y1=\"" << num(ay.px_hi) << "\" x2=\"" << num(ax.map(t)) << "\" y2=\"" << num(ay.px_lo) << "\"/>\n";
  for (double t : ticks(ay)) o << "<line x1=\"" << num(ax.px_lo) << "\" y1=\"" << num(ay.map(t)) << "\" x2=\"" << num(ax.px_hi) << "\" y2=\"" << num(ay.map(t)) << "\"/>\n";
  o << "</g>\n";
  o << "<rect x=\"" << num(ax.px_lo) << "\" y=\"" << num(ay.px_hi) << "\" width=\"" << num(ax.px_hi - ax.px_lo)
    << "\" height=\"" << num(ay.px_lo - ay.px_hi) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    o << "<text x=\"" << num(ax.map(t)) << "\" y=\"" << num(ay.px_lo + 16) << "\" text-anchor=\"middle\">"
      << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    o << "<text x=\"" << num(ax.px_lo - 6) << "\" y=\"" << num(ay.map(t) + 4) << "\" text-anchor=\"end\">"
      << tick_label(t) << "</text>\n";
  }
  o << "<text x=\"" << num((ax.px_lo + ax.px_hi) / 2) << "\" y=\"" << opt.height - 18
    << "\" text-anchor=\"middle\">" << xml_escape(opt.x_label) << (ax.log ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(20 " << num((ay.px_lo + ay.px_hi) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(opt.y_label) << (ay.log ? " (log)" : "")
    << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    std::vector<std::string> runs;
    std::string cur;
    const std::size_t n = std::min(ser.x.size(), ser.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!ax.usable(ser.x[i]) || !ay.usable(ser.y[i])) {
        if (!cur.empty()) runs.push_back(std::move(cur));
        cur.clear();
        continue;
      }
      const std::string pt = num(ax.map(ser.x[i])) + "," + num(ay.map(ser.y[i]));
      if (ser.markers) {
        const auto comma = pt.find(',');
        o << "<circle cx=\"" << pt.substr(0, comma) << "\" cy=\"" << pt.substr(comma + 1) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
      }
      cur += (cur.empty() ? "" : " ") + pt;
    }
    if (!cur.empty()) runs.push_back(std::move(cur));
    if (!ser.markers) {
      for (const auto& r : runs) {
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << r << "\"/>\n";
      }
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << num(ax.px_hi + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(ax.px_hi + 36)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(ax.px_hi + 42) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(ser.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const std::vector<Series>& series, const ChartOptions& opt) {
  write_text_file(path, render_svg(series, opt));
}

}  // namespace diffu::report
