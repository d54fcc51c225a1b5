#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace diffu::bench {

/// Outcome of one numerical check. `tolerance` states the rule the verdict
/// was computed with; nothing else feeds into `pass`.
struct BoundCheckResult {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> measured;
  std::vector<double> reference;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string tolerance;
  std::string detail;

  void add(std::string label, double value, double ref);
  nlohmann::json to_json() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = a x + b.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares through the origin, y = a x. R^2 is the uncentred one.
LineFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);
/// Slope of log y against log x.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Number of i with v[i+1] <= v[i] (resp. >= for decreasing).
int increasing_violations(const std::vector<double>& v);
int decreasing_violations(const std::vector<double>& v);

}  // namespace diffu::bench
