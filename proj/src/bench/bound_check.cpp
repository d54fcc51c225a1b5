#include "diffu/bench/bound_check.hpp"

#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu::bench {

void BoundCheckResult::add(std::string label, double value, double ref) {
  labels.push_back(std::move(label));
  measured.push_back(value);
  reference.push_back(ref);
}

nlohmann::json BoundCheckResult::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < measured.size(); ++i) {
    rows.push_back({{"label", labels[i]}, {"measured", num(measured[i])}, {"reference", num(reference[i])}});
  }
  return {{"name", name},   {"pass", pass},       {"tolerance", tolerance},     {"detail", detail},
          {"slope", num(slope)}, {"intercept", num(intercept)}, {"r_squared", num(r_squared)}, {"values", rows}};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "line fit needs two or more points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "line fit needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

LineFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && !x.empty(), "line fit needs points");
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  require(sxx > 0.0, "line fit needs a nonzero x");
  LineFit f;
  f.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += (y[i] - f.slope * x[i]) * (y[i] - f.slope * x[i]);
  f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

int increasing_violations(const std::vector<double>& v) {
  int bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) ++bad;
  return bad;
}

int decreasing_violations(const std::vector<double>& v) {
  int bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) ++bad;
  return bad;
}

}  // namespace diffu::bench
