#include "diffu/measures/score_oracle.hpp"

#include <cmath>
#include <string>

#include "diffu/common/error.hpp"
#include "diffu/common/parallel.hpp"

namespace diffu {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail_validation("tau must be finite and > 0, got " + std::to_string(tau));
}

void ScoreOracle::check_query(const Vector& x, double tau) const {
  check_tau(tau);
  if (x.size() != dim()) {
    fail_validation("dimension mismatch: oracle dim " + std::to_string(dim()) + ", point dim " +
                    std::to_string(x.size()));
  }
}

Vector ScoreOracle::hessian_vp(const Vector&, double, const Vector&) const {
  throw CapabilityError("oracle '" + id() + "' does not provide Hessian-vector products");
}

LocalResponse ScoreOracle::respond(const Vector& x, double tau, const Matrix& probes) const {
  LocalResponse r;
  r.score = score(x, tau);
  r.hvps.resize(dim(), probes.cols());
  for (Index j = 0; j < probes.cols(); ++j) r.hvps.col(j) = hessian_vp(x, tau, probes.col(j));
  return r;
}

Matrix ScoreOracle::score_batch(const Matrix& xs, double tau) const {
  Matrix out(xs.rows(), xs.cols());
  for (Index i = 0; i < xs.rows(); ++i) out.row(i) = score(xs.row(i).transpose(), tau).transpose();
  return out;
}

void ScoreOracle::draw_clean(CounterRng&, Eigen::Ref<Vector>) const {
  throw CapabilityError("oracle '" + id() + "' has no sampler");
}

Matrix ScoreOracle::sample(double tau, Index count, std::uint64_t seed) const {
  require(count >= 1, "sample count must be >= 1");
  require(tau >= 0.0 && std::isfinite(tau), "sampling tau must be finite and >= 0");
  if (!has_sampler()) throw CapabilityError("oracle '" + id() + "' has no sampler");
  const Index k = dim();
  Matrix out(count, k);
  const double scale = std::sqrt(tau);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t b, std::size_t e) {
    Vector x0(k);
    for (std::size_t i = b; i < e; ++i) {
      CounterRng rng(seed, StreamTag::kSample, i);
      draw_clean(rng, x0);
      for (Index j = 0; j < k; ++j) out(static_cast<Index>(i), j) = x0(j) + scale * rng.normal();
    }
  });
  return out;
}

}  // namespace diffu
