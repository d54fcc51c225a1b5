#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace diffu {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in R^k. Plain Eigen vector; finiteness is checked at API boundaries.
using Point = Vector;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace diffu
