#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace diffu::toy {

enum class ScheduleKind { kVeContinuous, kDdpmLinear };

/// Forward noising schedule. In ve_continuous mode training draws
/// x = x0 + sqrt(tau) n with log tau uniform in [tau_min, tau_max] and the
/// network is conditioned on log tau. In ddpm_linear mode x_t =
/// sqrt(abar_t) x0 + sqrt(1 - abar_t) n for t = 1..T (stored 0-based), which
/// corresponds to tau(t) = (1 - abar_t) / abar_t after rescaling by
/// 1 / sqrt(abar_t).
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::kVeContinuous;
  double tau_min = 1e-4;
  double tau_max = 6400.0;
  int steps = 100;
  double beta_start = 1e-4;
  double beta_end = 0.05;

  std::vector<double> betas;
  std::vector<double> alpha_bars;
  std::vector<double> taus;

  static NoiseSchedule ve(double tau_min = 1e-4, double tau_max = 6400.0);
  static NoiseSchedule ddpm(int steps = 100, double beta_start = 1e-4, double beta_end = 0.05);

  /// Range of tau on which the model may be queried.
  double query_min() const;
  double query_max() const;

  /// DDPM: index whose tau is nearest to tau in log scale.
  int nearest_step(double tau) const;

  /// Network time input for a VE tau (log tau) or DDPM step (the index).
  double time_input(double tau_or_step) const;

  std::string name() const;
  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json& j);
  static NoiseSchedule parse(const std::string& kind);
};

}  // namespace diffu::toy
