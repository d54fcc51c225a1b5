#include "diffu/toy/mlp.hpp"

#include <cmath>
#include <numbers>

#include "diffu/common/error.hpp"
#include "diffu/common/rng.hpp"
#include "diffu/toy/embedding.hpp"

namespace diffu::toy {

double gelu(double z) { return 0.5 * z * std::erfc(-z / std::numbers::sqrt2); }

double gelu_derivative(double z) {
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return cdf + z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

nlohmann::json EmbedConfig::to_json() const {
  return {{"sinusoidal_input", sinusoidal_input},
          {"input_dim", input_dim},
          {"time_dim", time_dim},
          {"input_scale", input_scale},
          {"time_scale", time_scale}};
}

EmbedConfig EmbedConfig::from_json(const nlohmann::json& j) {
  EmbedConfig e;
  e.sinusoidal_input = j.at("sinusoidal_input").get<bool>();
  e.input_dim = j.at("input_dim").get<int>();
  e.time_dim = j.at("time_dim").get<int>();
  e.input_scale = j.at("input_scale").get<double>();
  e.time_scale = j.at("time_scale").get<double>();
  return e;
}

EmbedConfig default_embedding(Index data_dim) {
  EmbedConfig e;
  e.sinusoidal_input = data_dim <= 2;
  return e;
}

MlpScoreNet::MlpScoreNet(Index data_dim, EmbedConfig embed, std::vector<int> hidden)
    : data_dim_(data_dim), embed_(embed), hidden_(std::move(hidden)) {
  require(data_dim >= 1, "network data dimension must be >= 1");
  require(!hidden_.empty(), "network needs at least one hidden layer");
  if (embed_.sinusoidal_input) in_freq_ = embedding_frequencies(embed_.input_dim);
  time_freq_ = embedding_frequencies(embed_.time_dim);
  Index in = feature_dim();
  Index offset = 0;
  auto add = [&](Index out) {
    shapes_.push_back({out, in, offset});
    offset += out * in + out;
    in = out;
  };
  for (int h : hidden_) {
    require(h >= 1, "hidden widths must be >= 1");
    add(h);
  }
  add(data_dim_);
  params_ = Vector::Zero(offset);
}

Index MlpScoreNet::feature_dim() const {
  const Index per = embed_.sinusoidal_input ? embed_.input_dim : 1;
  return data_dim_ * per + embed_.time_dim;
}

Eigen::Map<const Matrix> MlpScoreNet::weight(std::size_t l) const {
  const Shape& s = shapes_[l];
  return {params_.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<Matrix> MlpScoreNet::weight(std::size_t l) {
  const Shape& s = shapes_[l];
  return {params_.data() + s.offset, s.rows, s.cols};
}
Eigen::Map<const Vector> MlpScoreNet::bias(std::size_t l) const {
  const Shape& s = shapes_[l];
  return {params_.data() + s.offset + s.rows * s.cols, s.rows};
}
Eigen::Map<Vector> MlpScoreNet::bias(std::size_t l) {
  const Shape& s = shapes_[l];
  return {params_.data() + s.offset + s.rows * s.cols, s.rows};
}

void MlpScoreNet::initialize(std::uint64_t seed, bool zero_final) {
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    CounterRng rng(seed, StreamTag::kInit, l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(shapes_[l].cols));
    auto w = weight(l);
    auto b = bias(l);
    const bool zero = zero_final && l + 1 == shapes_.size();
    for (Index j = 0; j < w.cols(); ++j)
      for (Index i = 0; i < w.rows(); ++i) w(i, j) = zero ? 0.0 : bound * (2.0 * rng.uniform() - 1.0);
    for (Index i = 0; i < b.size(); ++i) b(i) = zero ? 0.0 : bound * (2.0 * rng.uniform() - 1.0);
  }
}

void MlpScoreNet::input_features(const double* x, double t, double* out) const {
  Index row = 0;
  if (embed_.sinusoidal_input) {
    const Index half = in_freq_.size();
    for (Index c = 0; c < data_dim_; ++c) {
      const double v = embed_.input_scale * x[c];
      for (Index j = 0; j < half; ++j) {
        out[row++] = std::sin(in_freq_(j) * v);
        out[row++] = std::cos(in_freq_(j) * v);
      }
    }
  } else {
    for (Index c = 0; c < data_dim_; ++c) out[row++] = x[c];
  }
  const double v = embed_.time_scale * t;
  for (Index j = 0; j < time_freq_.size(); ++j) {
    out[row++] = std::sin(time_freq_(j) * v);
    out[row++] = std::cos(time_freq_(j) * v);
  }
}

Matrix MlpScoreNet::features(const Matrix& x, const Vector& t) const {
  require(x.rows() == data_dim_, "network input has wrong dimension");
  require(t.size() == x.cols(), "one time value per column required");
  Matrix f(feature_dim(), x.cols());
  for (Index b = 0; b < x.cols(); ++b) input_features(x.col(b).data(), t(b), f.col(b).data());
  return f;
}

Matrix MlpScoreNet::forward(const Matrix& x, const Vector& t) const {
  Matrix a = features(x, t);
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    Matrix z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 == shapes_.size()) return z;
    a = z.unaryExpr([](double v) { return gelu(v); });
  }
  return a;
}

double MlpScoreNet::loss(const Matrix& x, const Vector& t, const Matrix& target) const {
  return (forward(x, t) - target).colwise().squaredNorm().sum() / static_cast<double>(x.cols());
}

double MlpScoreNet::loss_and_grads(const Matrix& x, const Vector& t, const Matrix& target, Vector& grad) const {
  const std::size_t layers = shapes_.size();
  const auto batch = static_cast<double>(x.cols());
  std::vector<Matrix> acts(layers);  // input to layer l
  std::vector<Matrix> pre(layers);   // pre-activation of layer l
  acts[0] = features(x, t);
  for (std::size_t l = 0; l < layers; ++l) {
    pre[l] = weight(l) * acts[l];
    pre[l].colwise() += bias(l);
    if (l + 1 < layers) acts[l + 1] = pre[l].unaryExpr([](double v) { return gelu(v); });
  }
  const Matrix diff = pre.back() - target;
  const double value = diff.colwise().squaredNorm().sum() / batch;

  grad.setZero(params_.size());
  Matrix delta = (2.0 / batch) * diff;
  for (std::size_t l = layers; l-- > 0;) {
    const Shape& s = shapes_[l];
    Eigen::Map<Matrix> gw(grad.data() + s.offset, s.rows, s.cols);
    Eigen::Map<Vector> gb(grad.data() + s.offset + s.rows * s.cols, s.rows);
    gw.noalias() = delta * acts[l].transpose();
    gb = delta.rowwise().sum();
    if (l == 0) break;
    Matrix back = weight(l).transpose() * delta;
    delta = back.cwiseProduct(pre[l - 1].unaryExpr([](double v) { return gelu_derivative(v); }));
  }
  return value;
}

Matrix MlpScoreNet::forward_jvp(const Vector& x, double t, const Matrix& tangents, Vector& out) const {
  require(x.size() == data_dim_ && tangents.rows() == data_dim_, "network input has wrong dimension");
  const Index m = tangents.cols();
  Vector a(feature_dim());
  input_features(x.data(), t, a.data());
  Matrix da = Matrix::Zero(feature_dim(), m);
  if (embed_.sinusoidal_input) {
    const Index half = in_freq_.size();
    for (Index c = 0; c < data_dim_; ++c) {
      const double v = embed_.input_scale * x(c);
      for (Index j = 0; j < half; ++j) {
        const double w = in_freq_(j) * embed_.input_scale;
        const Index r = c * 2 * half + 2 * j;
        da.row(r) = (w * std::cos(in_freq_(j) * v)) * tangents.row(c);
        da.row(r + 1) = (-w * std::sin(in_freq_(j) * v)) * tangents.row(c);
      }
    }
  } else {
    da.topRows(data_dim_) = tangents;
  }
  for (std::size_t l = 0; l < shapes_.size(); ++l) {
    Vector z = weight(l) * a + bias(l);
    Matrix dz = weight(l) * da;
    if (l + 1 == shapes_.size()) {
      out = std::move(z);
      return dz;
    }
    const Vector slope = z.unaryExpr([](double v) { return gelu_derivative(v); });
    a = z.unaryExpr([](double v) { return gelu(v); });
    da = slope.asDiagonal() * dz;
  }
  return da;
}

nlohmann::json MlpScoreNet::to_json() const {
  return {{"data_dim", data_dim_}, {"embed", embed_.to_json()}, {"hidden", hidden_}};
}

MlpScoreNet MlpScoreNet::from_json(const nlohmann::json& j) {
  return MlpScoreNet(j.at("data_dim").get<Index>(), EmbedConfig::from_json(j.at("embed")),
                     j.at("hidden").get<std::vector<int>>());
}

}  // namespace diffu::toy
