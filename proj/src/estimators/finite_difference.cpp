#include "diffu/estimators/finite_difference.hpp"

#include <algorithm>
#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu {

std::vector<double> fornberg_weights(double z, std::span<const double> nodes, int order) {
  const std::size_t n = nodes.size();
  require(n > static_cast<std::size_t>(order), "need more nodes than the derivative order");
  const auto mo = static_cast<std::size_t>(order);
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n, std::vector<double>(mo + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, mo);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = c[j][mo];
  return w;
}

namespace {

struct Stencil {
  std::size_t first;
  std::vector<double> weights;  // d/du weights
};

std::vector<Stencil> log_stencils(std::span<const double> tau) {
  const std::size_t n = tau.size();
  require(n >= 3, "finite differences need at least three grid points");
  for (std::size_t i = 0; i < n; ++i) {
    require(tau[i] > 0.0, "grid must be positive");
    if (i) require(tau[i] > tau[i - 1], "grid must be strictly increasing");
  }
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = std::log(tau[i]);
  const std::size_t width = std::min<std::size_t>(5, n);
  std::vector<Stencil> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t half = width / 2;
    std::size_t first = i >= half ? i - half : 0;
    first = std::min(first, n - width);
    out[i].first = first;
    out[i].weights = fornberg_weights(u[i], std::span<const double>(u.data() + first, width), 1);
  }
  return out;
}

}  // namespace

std::vector<double> derivative_on_grid(std::span<const double> tau, std::span<const double> y) {
  require(tau.size() == y.size(), "grid and values differ in length");
  const auto st = log_stencils(tau);
  std::vector<double> d(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < st[i].weights.size(); ++j) acc += st[i].weights[j] * y[st[i].first + j];
    d[i] = acc / tau[i];
  }
  return d;
}

std::vector<double> derivative_stderr(std::span<const double> tau, std::span<const double> se) {
  require(tau.size() == se.size(), "grid and errors differ in length");
  const auto st = log_stencils(tau);
  std::vector<double> d(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < st[i].weights.size(); ++j) {
      const double t = st[i].weights[j] * se[st[i].first + j];
      acc += t * t;
    }
    d[i] = std::sqrt(acc) / tau[i];
  }
  return d;
}

std::vector<double> fir_from_fi_curve(std::span<const double> tau, std::span<const double> fi) {
  auto d = derivative_on_grid(tau, fi);
  for (double& v : d) v = -v;
  return d;
}

std::vector<double> fir_from_fi_curve(const DiagnosticCurve& c) {
  std::vector<double> fi(c.fi.size());
  for (std::size_t i = 0; i < fi.size(); ++i) fi[i] = c.fi[i].mean;
  return fir_from_fi_curve(c.grid.values, fi);
}

}  // namespace diffu
