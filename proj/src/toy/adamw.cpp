#include "diffu/toy/adamw.hpp"

#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu::toy {

nlohmann::json AdamWConfig::to_json() const {
  return {{"lr", lr}, {"beta1", beta1}, {"beta2", beta2}, {"eps", eps}, {"weight_decay", weight_decay}};
}

AdamWConfig AdamWConfig::from_json(const nlohmann::json& j) {
  AdamWConfig c;
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  return c;
}

void adamw_step(Vector& params, AdamWState& state, const Vector& grads, const AdamWConfig& cfg) {
  require(grads.size() == params.size() && state.m.size() == params.size(), "optimizer state size mismatch");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params *= 1.0 - cfg.lr * cfg.weight_decay;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
  params.array() -= cfg.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

}  // namespace diffu::toy
