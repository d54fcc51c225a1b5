#include "diffu/toy/schedule.hpp"

#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu::toy {

NoiseSchedule NoiseSchedule::ve(double tau_min, double tau_max) {
  require(tau_min > 0.0 && tau_max > tau_min, "ve schedule needs 0 < tau_min < tau_max");
  NoiseSchedule s;
  s.kind = ScheduleKind::kVeContinuous;
  s.tau_min = tau_min;
  s.tau_max = tau_max;
  return s;
}

NoiseSchedule NoiseSchedule::ddpm(int steps, double beta_start, double beta_end) {
  require(steps >= 2, "ddpm schedule needs at least two steps");
  require(beta_start > 0.0 && beta_end >= beta_start && beta_end < 1.0, "ddpm needs 0 < beta_1 <= beta_T < 1");
  NoiseSchedule s;
  s.kind = ScheduleKind::kDdpmLinear;
  s.steps = steps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  double abar = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double beta = beta_start + (beta_end - beta_start) * t / (steps - 1);
    abar *= 1.0 - beta;
    s.betas.push_back(beta);
    s.alpha_bars.push_back(abar);
    s.taus.push_back((1.0 - abar) / abar);
  }
  s.tau_min = s.taus.front();
  s.tau_max = s.taus.back();
  return s;
}

double NoiseSchedule::query_min() const { return tau_min; }
double NoiseSchedule::query_max() const { return tau_max; }

int NoiseSchedule::nearest_step(double tau) const {
  require(kind == ScheduleKind::kDdpmLinear, "nearest_step applies to ddpm schedules");
  const double lt = std::log(tau);
  int best = 0;
  for (int t = 1; t < steps; ++t) {
    if (std::abs(std::log(taus[static_cast<std::size_t>(t)]) - lt) <
        std::abs(std::log(taus[static_cast<std::size_t>(best)]) - lt)) {
      best = t;
    }
  }
  return best;
}

double NoiseSchedule::time_input(double tau_or_step) const {
  return kind == ScheduleKind::kVeContinuous ? std::log(tau_or_step) : tau_or_step;
}

std::string NoiseSchedule::name() const { return kind == ScheduleKind::kVeContinuous ? "ve" : "ddpm"; }

nlohmann::json NoiseSchedule::to_json() const {
  nlohmann::json j = {{"kind", name()}};
  if (kind == ScheduleKind::kVeContinuous) {
    j["tau_min"] = tau_min;
    j["tau_max"] = tau_max;
  } else {
    j["steps"] = steps;
    j["beta_start"] = beta_start;
    j["beta_end"] = beta_end;
    j["alpha_bars"] = alpha_bars;
    j["taus"] = taus;
  }
  return j;
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ve") return ve(j.at("tau_min").get<double>(), j.at("tau_max").get<double>());
  if (kind == "ddpm") {
    return ddpm(j.at("steps").get<int>(), j.at("beta_start").get<double>(), j.at("beta_end").get<double>());
  }
  fail_validation("unknown schedule kind '" + kind + "'");
}

NoiseSchedule NoiseSchedule::parse(const std::string& kind) {
  if (kind == "ve") return ve();
  if (kind == "ddpm") return ddpm();
  fail_validation("unknown schedule '" + kind + "' (expected ve or ddpm)");
}

}  // namespace diffu::toy
