#include "diffu/estimators/tau_grid.hpp"

#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu {

namespace {

std::vector<double> geometric(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo && std::isfinite(hi), "grid needs 0 < lo < hi");
  require(n >= 2, "grid needs at least two points");
  std::vector<double> v(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a + step * static_cast<double>(i));
  v.front() = lo;
  v.back() = hi;
  return v;
}

}  // namespace

TauGrid TauGrid::log_sqrt(double sqrt_lo, double sqrt_hi, std::size_t n) {
  TauGrid g{geometric(sqrt_lo, sqrt_hi, n), GridSpacing::kLogSqrt};
  for (double& t : g.values) t *= t;
  g.validate();
  return g;
}

TauGrid TauGrid::log(double lo, double hi, std::size_t n) {
  TauGrid g{geometric(lo, hi, n), GridSpacing::kLog};
  g.validate();
  return g;
}

TauGrid TauGrid::linear(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo && std::isfinite(hi), "grid needs 0 < lo < hi");
  require(n >= 2, "grid needs at least two points");
  TauGrid g{std::vector<double>(n), GridSpacing::kLinear};
  for (std::size_t i = 0; i < n; ++i) g.values[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.validate();
  return g;
}

TauGrid TauGrid::custom(std::vector<double> values) {
  TauGrid g{std::move(values), GridSpacing::kCustom};
  g.validate();
  return g;
}

TauGrid TauGrid::standard() { return log_sqrt(0.01, 80.0, 64); }

void TauGrid::validate() const {
  require(!values.empty(), "tau grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] > 0.0 && std::isfinite(values[i]), "tau grid values must be finite and > 0");
    if (i) require(values[i] > values[i - 1], "tau grid must be strictly increasing");
  }
}

const char* spacing_name(GridSpacing s) {
  switch (s) {
    case GridSpacing::kLogSqrt:
      return "log-sqrt";
    case GridSpacing::kLog:
      return "log";
    case GridSpacing::kLinear:
      return "linear";
    case GridSpacing::kCustom:
      return "custom";
  }
  return "custom";
}

GridSpacing parse_spacing(const std::string& s) {
  if (s == "log-sqrt") return GridSpacing::kLogSqrt;
  if (s == "log") return GridSpacing::kLog;
  if (s == "linear") return GridSpacing::kLinear;
  if (s == "custom") return GridSpacing::kCustom;
  fail_validation("unknown grid spacing '" + s + "' (expected log-sqrt, log, linear, custom)");
}

void require_same_grid(const TauGrid& a, const TauGrid& b) {
  if (a.values != b.values) {
    fail_validation("tau grids differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                    " points); deviations are only computed on identical grids");
  }
}

}  // namespace diffu
