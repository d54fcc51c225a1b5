#pragma once

#include <span>
#include <vector>

#include "diffu/estimators/curve.hpp"

namespace diffu {

/// Fornberg weights for the `order`-th derivative at z from arbitrary
/// distinct nodes.
std::vector<double> fornberg_weights(double z, std::span<const double> nodes, int order);

/// dy/dtau on a positive grid, differentiating in u = log tau with five-point
/// stencils (shifted inward at the ends) and dividing by tau.
std::vector<double> derivative_on_grid(std::span<const double> tau, std::span<const double> y);

/// Propagated standard error of derivative_on_grid for independent
/// per-point errors (conservative under positively correlated errors).
std::vector<double> derivative_stderr(std::span<const double> tau, std::span<const double> se);

/// -dFI/dtau from an FI curve.
std::vector<double> fir_from_fi_curve(std::span<const double> tau, std::span<const double> fi);
std::vector<double> fir_from_fi_curve(const DiagnosticCurve& c);

}  // namespace diffu
