#include "diffu/measures/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diffu/common/error.hpp"

namespace diffu {

Vector MixturePosterior::cov_vp(const Vector& v) const {
  const Vector proj = centred.transpose() * v;  // <x_i - m, v>
  return centred * proj.cwiseProduct(support_weights);
}

Matrix MixturePosterior::covariance() const {
  return centred * support_weights.asDiagonal() * centred.transpose();
}

EmpiricalMeasure::EmpiricalMeasure(Matrix samples) : samples_(std::move(samples)) {
  require(samples_.rows() >= 1, "empirical measure needs at least one atom");
  weights_ = Vector::Constant(samples_.rows(), 1.0 / static_cast<double>(samples_.rows()));
  init();
}

EmpiricalMeasure::EmpiricalMeasure(Matrix samples, Vector weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
  require(samples_.rows() >= 1, "empirical measure needs at least one atom");
  require(weights_.size() == samples_.rows(), "weights length must equal atom count");
  require((weights_.array() >= 0.0).all() && weights_.allFinite(), "weights must be nonnegative");
  require(std::abs(weights_.sum() - 1.0) <= 1e-12, "weights must sum to 1 within 1e-12");
  init();
}

void EmpiricalMeasure::init() {
  require(samples_.cols() >= 1, "empirical measure needs dimension >= 1");
  require(samples_.allFinite(), "empirical atoms must be finite");
  atoms_t_ = samples_.transpose();
  log_weights_ = weights_.array().log();
  uniform_ = (weights_.array() == weights_(0)).all();
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (Index i = 0; i < weights_.size(); ++i) {
    acc += weights_(i);
    cumulative_(i) = acc;
  }
}

std::string EmpiricalMeasure::id() const {
  std::ostringstream os;
  os << "empirical(N=" << size() << ",k=" << dim() << ")";
  return os.str();
}

MixturePosterior EmpiricalMeasure::posterior(const Vector& x, double tau) const {
  check_query(x, tau);
  const Index n = size();
  const Index k = dim();
  // Scratch for the log-weights; one buffer per thread avoids a large
  // allocation on every query.
  thread_local std::vector<double> logw;
  logw.resize(static_cast<std::size_t>(n));
  double best = -std::numeric_limits<double>::infinity();
  const double inv2tau = 0.5 / tau;
  for (Index i = 0; i < n; ++i) {
    const double d2 = (atoms_t_.col(i) - x).squaredNorm();
    const double lw = log_weights_(i) - d2 * inv2tau;
    logw[static_cast<std::size_t>(i)] = lw;
    best = std::max(best, lw);
  }
  MixturePosterior post;
  const double floor = best - MixturePosterior::kLogWeightCutoff;
  std::vector<double> w;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double lw = logw[static_cast<std::size_t>(i)];
    if (lw >= floor) {
      w.push_back(std::exp(lw - best));
      post.support.push_back(i);
      total += w.back();
    }
  }
  const Index s = static_cast<Index>(post.support.size());
  post.support_weights.resize(s);
  post.mean = Vector::Zero(k);
  for (Index j = 0; j < s; ++j) {
    const double wj = w[static_cast<std::size_t>(j)] / total;
    post.support_weights(j) = wj;
    post.mean += wj * atoms_t_.col(post.support[j]);
  }
  post.centred.resize(k, s);
  for (Index j = 0; j < s; ++j) post.centred.col(j) = atoms_t_.col(post.support[j]) - post.mean;
  return post;
}

Vector EmpiricalMeasure::score(const Vector& x, double tau) const {
  const MixturePosterior post = posterior(x, tau);
  return (post.mean - x) / tau;
}

Vector EmpiricalMeasure::hessian_vp(const Vector& x, double tau, const Vector& v) const {
  require(v.size() == dim(), "probe dimension mismatch");
  const MixturePosterior post = posterior(x, tau);
  return post.cov_vp(v) / (tau * tau) - v / tau;
}

LocalResponse EmpiricalMeasure::respond(const Vector& x, double tau, const Matrix& probes) const {
  require(probes.rows() == dim(), "probe dimension mismatch");
  const MixturePosterior post = posterior(x, tau);
  LocalResponse r;
  r.score = (post.mean - x) / tau;
  const Index k = dim();
  const auto support = static_cast<Index>(post.support.size());
  // Forming the k x k covariance costs O(|support| k^2) once; worth it when
  // there are at least k probes sharing it.
  if (probes.cols() >= k && k <= support) {
    Matrix h = post.covariance() / (tau * tau);
    h.diagonal().array() -= 1.0 / tau;
    r.hvps = h * probes;
  } else {
    const Matrix proj = post.centred.transpose() * probes;  // |support| x m
    r.hvps = post.centred * (post.support_weights.asDiagonal() * proj) / (tau * tau) - probes / tau;
  }
  return r;
}

Index EmpiricalMeasure::draw_index(CounterRng& rng) const {
  if (uniform_) return static_cast<Index>(rng.below(static_cast<std::uint64_t>(size())));
  const double u = rng.uniform() * cumulative_(size() - 1);
  const double* begin = cumulative_.data();
  const double* it = std::upper_bound(begin, begin + size(), u);
  return std::min<Index>(static_cast<Index>(it - begin), size() - 1);
}

void EmpiricalMeasure::draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const {
  out = atoms_t_.col(draw_index(rng));
}

EmpiricalMeasure EmpiricalMeasure::permuted_columns(const std::vector<Index>& perm) const {
  require(static_cast<Index>(perm.size()) == dim(), "permutation length must equal dimension");
  std::vector<bool> seen(perm.size(), false);
  for (Index p : perm) {
    require(p >= 0 && p < dim() && !seen[static_cast<std::size_t>(p)], "invalid permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  Matrix out(size(), dim());
  for (Index j = 0; j < dim(); ++j) out.col(j) = samples_.col(perm[static_cast<std::size_t>(j)]);
  if (uniform_) return EmpiricalMeasure(std::move(out));
  return {std::move(out), weights_};
}

MixturePosterior mixture_posterior(const EmpiricalMeasure& e, const Point& x, double tau) {
  return e.posterior(x, tau);
}

Vector mixture_score(const EmpiricalMeasure& e, const Point& x, double tau) { return e.score(x, tau); }

Vector mixture_hessian_vp(const EmpiricalMeasure& e, const Point& x, double tau, const Vector& v) {
  return e.hessian_vp(x, tau, v);
}

}  // namespace diffu
