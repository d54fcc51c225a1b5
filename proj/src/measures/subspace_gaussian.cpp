#include "diffu/measures/subspace_gaussian.hpp"

#include <sstream>

#include "diffu/common/error.hpp"

namespace diffu {
namespace {

GaussianMeasure make_intrinsic(const Matrix& embedding, Matrix cov) {
  require(embedding.cols() >= 1 && embedding.cols() <= embedding.rows(), "subspace needs 1 <= m <= k");
  require(cov.rows() == embedding.cols() && cov.cols() == embedding.cols(),
          "intrinsic covariance must be m x m");
  const Matrix gram = embedding.transpose() * embedding;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  require(err <= 1e-10, "embedding columns must be orthonormal within 1e-10");
  return {Vector::Zero(embedding.cols()), std::move(cov)};
}

}  // namespace

SubspaceGaussian::SubspaceGaussian(Matrix embedding, Matrix intrinsic_covariance)
    : embedding_(std::move(embedding)), intrinsic_(make_intrinsic(embedding_, std::move(intrinsic_covariance))) {}

SubspaceGaussian SubspaceGaussian::coordinate(Index m, Index k) {
  require(m >= 1 && m <= k, "subspace needs 1 <= m <= k");
  Matrix u = Matrix::Zero(k, m);
  u.topLeftCorner(m, m).setIdentity();
  return {u, Matrix::Identity(m, m)};
}

GaussianMeasure SubspaceGaussian::as_ambient() const {
  Matrix c = embedding_ * intrinsic_.covariance() * embedding_.transpose();
  c = 0.5 * (c + c.transpose());
  return {Vector::Zero(dim()), c};
}

std::string SubspaceGaussian::id() const {
  std::ostringstream os;
  os << "subspace_gaussian(m=" << intrinsic_dim() << ",k=" << dim() << ")";
  return os.str();
}

Vector SubspaceGaussian::score(const Vector& x, double tau) const {
  check_query(x, tau);
  const Vector y = embedding_.transpose() * x;
  const Vector normal = x - embedding_ * y;
  return embedding_ * intrinsic_.score(y, tau) - normal / tau;
}

Vector SubspaceGaussian::hessian_vp(const Vector& x, double tau, const Vector& v) const {
  check_query(x, tau);
  require(v.size() == dim(), "probe dimension mismatch");
  const Vector vy = embedding_.transpose() * v;
  const Vector vn = v - embedding_ * vy;
  return -embedding_ * intrinsic_.smoothed_precision_vp(tau, vy) - vn / tau;
}

void SubspaceGaussian::draw_clean(CounterRng& rng, Eigen::Ref<Vector> out) const {
  Vector y(intrinsic_dim());
  intrinsic_.draw_clean(rng, y);
  out = embedding_ * y;
}

double subspace_fir_exact(const SubspaceGaussian& s, double tau) {
  const double normal = static_cast<double>(s.dim() - s.intrinsic_dim());
  return gaussian_fir_exact(s.intrinsic(), tau) + normal / (tau * tau);
}

double subspace_fi_exact(const SubspaceGaussian& s, double tau) {
  const double normal = static_cast<double>(s.dim() - s.intrinsic_dim());
  return gaussian_fi_exact(s.intrinsic(), tau) + normal / tau;
}

}  // namespace diffu
