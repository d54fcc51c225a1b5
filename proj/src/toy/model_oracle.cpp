#include "diffu/toy/model_oracle.hpp"

#include <cmath>
#include <sstream>

#include "diffu/common/error.hpp"

namespace diffu::toy {

ModelScoreOracle::ModelScoreOracle(std::shared_ptr<const Checkpoint> ck, std::shared_ptr<const ScoreOracle> data,
                                   ModelHvp hvp)
    : ck_(std::move(ck)), data_(std::move(data)), hvp_(hvp) {
  require(ck_ != nullptr, "model oracle needs a checkpoint");
  if (data_) require(data_->dim() == dim(), "data dimension does not match the model");
}

std::string ModelScoreOracle::id() const {
  std::ostringstream os;
  os << "model(" << ck_->schedule.name() << ",k=" << dim() << ",seed=" << ck_->config.seed << ")";
  return os.str();
}

ModelScoreOracle::Query ModelScoreOracle::query(double tau) const {
  check_tau(tau);
  const NoiseSchedule& s = ck_->schedule;
  // Small relative slack so grid endpoints computed in floating point pass.
  if (tau < s.query_min() * (1.0 - 1e-12) || tau > s.query_max() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "tau " << tau << " is outside the model's range [" << s.query_min() << ", " << s.query_max() << "]";
    fail_validation(os.str());
  }
  if (s.kind == ScheduleKind::kVeContinuous) return {ck_->input_scale(tau), std::log(tau), tau};
  const int t = s.nearest_step(tau);
  const auto ti = static_cast<std::size_t>(t);
  return {std::sqrt(s.alpha_bars[ti]), static_cast<double>(t), s.taus[ti]};
}

Vector ModelScoreOracle::score(const Vector& x, double tau) const {
  check_query(x, tau);
  const Query q = query(tau);
  const Matrix eps = ck_->net.forward(q.in_scale * x, Vector::Constant(1, q.time));
  return -eps.col(0) / std::sqrt(q.tau);
}

Matrix ModelScoreOracle::score_batch(const Matrix& xs, double tau) const {
  require(xs.cols() == dim(), "dimension mismatch in score batch");
  const Query q = query(tau);
  const Matrix eps = ck_->net.forward(q.in_scale * xs.transpose(), Vector::Constant(xs.rows(), q.time));
  return -eps.transpose() / std::sqrt(q.tau);
}

LocalResponse ModelScoreOracle::respond(const Vector& x, double tau, const Matrix& probes) const {
  check_query(x, tau);
  require(probes.rows() == dim(), "probe dimension mismatch");
  const Query q = query(tau);
  LocalResponse r;
  if (hvp_ == ModelHvp::kForwardMode) {
    Vector eps;
    const Matrix deps = ck_->net.forward_jvp(q.in_scale * x, q.time, q.in_scale * probes, eps);
    r.score = -eps / std::sqrt(q.tau);
    r.hvps = -deps / std::sqrt(q.tau);
    return r;
  }
  const double h = fd_step(tau);
  const Index m = probes.cols();
  Matrix pts(m + 1, dim());
  pts.row(0) = x.transpose();
  for (Index j = 0; j < m; ++j) pts.row(j + 1) = (x + h * probes.col(j)).transpose();
  const Matrix s = score_batch(pts, tau);
  r.score = s.row(0).transpose();
  r.hvps = (s.bottomRows(m).rowwise() - s.row(0)).transpose() / h;
  return r;
}

Vector ModelScoreOracle::hessian_vp(const Vector& x, double tau, const Vector& v) const {
  return respond(x, tau, v).hvps.col(0);
}

void ModelScoreOracle::draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const {
  if (!data_) throw CapabilityError("model oracle '" + id() + "' has no data for sampling");
  data_->draw_clean(rng, out);
}

Matrix sample_reverse(const Checkpoint& ck, Index count, std::uint64_t seed, int ve_steps) {
  require(count >= 1, "sample count must be >= 1");
  const Index k = ck.net.data_dim();
  const NoiseSchedule& s = ck.schedule;
  std::vector<CounterRng> rngs;
  rngs.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) rngs.emplace_back(seed, StreamTag::kReverse, static_cast<std::uint64_t>(i));
  auto noise = [&](Matrix& z) {
    for (Index i = 0; i < count; ++i)
      for (Index c = 0; c < k; ++c) z(c, i) = rngs[static_cast<std::size_t>(i)].normal();
  };
  Matrix x(k, count);
  Matrix z(k, count);
  noise(x);

  if (s.kind == ScheduleKind::kDdpmLinear) {
    for (int t = s.steps - 1; t >= 0; --t) {
      const auto ti = static_cast<std::size_t>(t);
      const Matrix eps = ck.net.forward(x, Vector::Constant(count, static_cast<double>(t)));
      const double beta = s.betas[ti];
      x = (x - (beta / std::sqrt(1.0 - s.alpha_bars[ti])) * eps) / std::sqrt(1.0 - beta);
      if (t > 0) {
        noise(z);
        x += std::sqrt(beta) * z;
      }
    }
    return x.transpose();
  }

  require(ve_steps >= 2, "ve sampling needs at least two steps");
  const double lo = std::log(s.tau_min);
  const double hi = std::log(s.tau_max);
  auto tau_at = [&](int i) { return std::exp(hi + (lo - hi) * i / (ve_steps - 1)); };
  auto model_score = [&](const Matrix& pts, double tau) {
    const Matrix eps = ck.net.forward(ck.input_scale(tau) * pts, Vector::Constant(count, std::log(tau)));
    return Matrix(-eps / std::sqrt(tau));
  };
  x *= std::sqrt(s.tau_max);
  for (int i = 0; i + 1 < ve_steps; ++i) {
    const double t0 = tau_at(i);
    const double t1 = tau_at(i + 1);
    x += (t0 - t1) * model_score(x, t0);
    noise(z);
    x += std::sqrt(t1 * (t0 - t1) / t0) * z;
  }
  x += s.tau_min * model_score(x, s.tau_min);
  return x.transpose();
}

}  // namespace diffu::toy
