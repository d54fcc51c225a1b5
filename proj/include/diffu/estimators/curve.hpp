#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffu/estimators/estimators.hpp"
#include "diffu/estimators/tau_grid.hpp"
#include "diffu/report/csv.hpp"

namespace diffu {

/// Per-tau warning bits. Values are reported as computed, never clamped.
enum CurveFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagHighStderr = 1,        // clustered stderr above 20% of |mean| (FI or FIR)
  kFlagNegativeMmse = 2,
  kFlagNegativeResistance = 4,
};

struct DiagnosticCurve {
  TauGrid grid;
  Index dim = 0;
  std::vector<EstimateWithError> fi;
  std::vector<EstimateWithError> fir;
  std::vector<double> mmse;
  std::vector<Resistance> resistance;
  std::vector<std::uint32_t> flags;

  std::string oracle_id;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m_probes = 0;
  std::string fir_method = "jvp";
  std::string probe = "rademacher";

  std::size_t size() const { return grid.size(); }
  void validate() const;
};

struct SweepOptions {
  std::size_t n = 1000;
  std::size_t m_probes = 50;
  FirMethod method = FirMethod::kJvp;
  ProbeKind probes = ProbeKind::kRademacher;
  double fd_step = 0.0;  // <= 0: default_fd_step(tau)
};

/// FI, FIR, MMSE and the resistance split at every grid point. The same
/// seed is used at every tau, so samples share their clean points and noise
/// directions across the grid.
DiagnosticCurve diagnostic_sweep(const ScoreOracle& o, const TauGrid& grid, const SweepOptions& opt,
                                 std::uint64_t seed);

/// Closed-form curve (zero standard errors) from per-tau FI and FIR values.
DiagnosticCurve analytic_curve(const TauGrid& grid, Index dim, const std::vector<double>& fi,
                               const std::vector<double>& fir, const std::string& id);

std::uint32_t curve_flags(const EstimateWithError& fi, const EstimateWithError& fir, double mmse,
                          const Resistance& r);

/// CSV columns: tau, sqrt_tau, fi_mean, fi_stderr, fir_mean, fir_stderr,
/// mmse, resistance_total, noise_gain, complexity_penalty. fir_stderr is
/// the clustered standard error.
report::CsvTable curve_to_table(const DiagnosticCurve& c);
DiagnosticCurve curve_from_table(const report::CsvTable& t);
void write_curve_csv(const std::string& path, const DiagnosticCurve& c);
DiagnosticCurve read_curve_csv(const std::string& path);

/// JSON report with provenance, flags and full estimates.
nlohmann::json curve_to_json(const DiagnosticCurve& c);

/// Pointwise FIR deviations of two curves on the same grid. Columns: tau,
/// fir_ambient, fir_latent, deviation, and scaled_deviation when D, d > m.
report::CsvTable deviation_table(const DiagnosticCurve& ambient, const DiagnosticCurve& latent, Index big_d,
                                 Index d, Index m);

}  // namespace diffu
