#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "diffu/common/types.hpp"

namespace diffu::toy {

struct EmbedConfig {
  bool sinusoidal_input = true;  // else identity input features
  int input_dim = 128;           // per data coordinate
  int time_dim = 128;
  double input_scale = 25.0;     // coordinates are multiplied by this before embedding
  double time_scale = 1.0;

  nlohmann::json to_json() const;
  static EmbedConfig from_json(const nlohmann::json& j);
};

/// Sinusoidal input features for 2-D data, identity above.
EmbedConfig default_embedding(Index data_dim);

/// Noise-prediction MLP: [embed(x), embed(t)] -> hidden (GELU) ... -> k.
/// All parameters live in one flat vector so the optimizer and gradient
/// checks see a single array. Layer l stores W_l (out x in, column-major)
/// followed by b_l.
class MlpScoreNet {
 public:
  MlpScoreNet() = default;
  MlpScoreNet(Index data_dim, EmbedConfig embed, std::vector<int> hidden = {128, 128, 128});

  Index data_dim() const { return data_dim_; }
  Index feature_dim() const;
  const EmbedConfig& embed() const { return embed_; }
  const std::vector<int>& hidden() const { return hidden_; }
  std::size_t layer_count() const { return shapes_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  Index parameter_count() const { return params_.size(); }

  Eigen::Map<const Matrix> weight(std::size_t l) const;
  Eigen::Map<Matrix> weight(std::size_t l);
  Eigen::Map<const Vector> bias(std::size_t l) const;
  Eigen::Map<Vector> bias(std::size_t l);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
  /// layer is zeroed when zero_final is set.
  void initialize(std::uint64_t seed, bool zero_final = true);

  /// Input features for the columns of x (k x B) at times t (B).
  Matrix features(const Matrix& x, const Vector& t) const;

  /// Predicted noise, k x B.
  Matrix forward(const Matrix& x, const Vector& t) const;

  /// Mean over the batch of ||forward - target||^2; gradient w.r.t. the flat
  /// parameters written to grad (resized).
  double loss_and_grads(const Matrix& x, const Vector& t, const Matrix& target, Vector& grad) const;
  double loss(const Matrix& x, const Vector& t, const Matrix& target) const;

  /// Forward value at one point plus d(forward)/dx applied to each tangent
  /// column, propagated in forward mode. Returns k x m; value written to out.
  Matrix forward_jvp(const Vector& x, double t, const Matrix& tangents, Vector& out) const;

  nlohmann::json to_json() const;  // architecture only
  static MlpScoreNet from_json(const nlohmann::json& j);

 private:
  struct Shape {
    Index rows, cols;
    Index offset;  // start of W; bias follows
  };

  void input_features(const double* x, double t, double* out) const;

  Index data_dim_ = 0;
  EmbedConfig embed_;
  std::vector<int> hidden_;
  std::vector<Shape> shapes_;
  Vector params_;
  Vector in_freq_;
  Vector time_freq_;
};

double gelu(double z);
double gelu_derivative(double z);

}  // namespace diffu::toy
