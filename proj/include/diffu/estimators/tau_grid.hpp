#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace diffu {

enum class GridSpacing { kLogSqrt, kLog, kLinear, kCustom };

/// Ascending noise variances tau > 0.
struct TauGrid {
  std::vector<double> values;
  GridSpacing spacing = GridSpacing::kCustom;

  /// sqrt(tau) log-spaced in [sqrt_lo, sqrt_hi].
  static TauGrid log_sqrt(double sqrt_lo, double sqrt_hi, std::size_t n);
  static TauGrid log(double lo, double hi, std::size_t n);
  static TauGrid linear(double lo, double hi, std::size_t n);
  static TauGrid custom(std::vector<double> values);
  /// 64 points, sqrt(tau) log-spaced in [0.01, 80].
  static TauGrid standard();

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  void validate() const;
};

const char* spacing_name(GridSpacing s);
GridSpacing parse_spacing(const std::string& s);

/// Grids used for pointwise comparisons must agree exactly.
void require_same_grid(const TauGrid& a, const TauGrid& b);

}  // namespace diffu
