#pragma once

#include <json.hpp>

#include "diffu/common/types.hpp"

namespace diffu::toy {

struct AdamWConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  nlohmann::json to_json() const;
  static AdamWConfig from_json(const nlohmann::json& j);
};

struct AdamWState {
  Vector m;
  Vector v;
  long step = 0;

  explicit AdamWState(Index n = 0) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// Decoupled weight decay (params shrink by lr * wd before the Adam step),
/// bias-corrected moments.
void adamw_step(Vector& params, AdamWState& state, const Vector& grads, const AdamWConfig& cfg);

}  // namespace diffu::toy
