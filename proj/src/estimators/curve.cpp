#include "diffu/estimators/curve.hpp"

#include <cmath>

#include "diffu/common/error.hpp"

namespace diffu {

void DiagnosticCurve::validate() const {
  grid.validate();
  const std::size_t n = grid.size();
  require(fi.size() == n && fir.size() == n && mmse.size() == n && resistance.size() == n && flags.size() == n,
          "diagnostic curve arrays must match the grid length");
}

std::uint32_t curve_flags(const EstimateWithError& fi, const EstimateWithError& fir, double mmse,
                          const Resistance& r) {
  std::uint32_t f = kFlagNone;
  if (fi.clustered_std_error > 0.2 * std::abs(fi.mean) || fir.clustered_std_error > 0.2 * std::abs(fir.mean)) {
    f |= kFlagHighStderr;
  }
  if (mmse < 0.0) f |= kFlagNegativeMmse;
  if (r.total < 0.0) f |= kFlagNegativeResistance;
  return f;
}

DiagnosticCurve diagnostic_sweep(const ScoreOracle& o, const TauGrid& grid, const SweepOptions& opt,
                                 std::uint64_t seed) {
  grid.validate();
  DiagnosticCurve c;
  c.grid = grid;
  c.dim = o.dim();
  c.oracle_id = o.id();
  c.seed = seed;
  c.n = opt.n;
  c.m_probes = opt.m_probes;
  c.fir_method = fir_method_name(opt.method);
  c.probe = probe_name(opt.probes);
  for (double tau : grid.values) {
    const FiFirEstimate e = estimate_fi_fir(o, tau, opt.n, opt.m_probes, seed, opt.method, opt.probes, opt.fd_step);
    const double mmse = mmse_from_fi(tau, c.dim, e.fi.mean);
    const Resistance r = denoising_resistance(tau, c.dim, e.fi.mean, e.fir.mean);
    c.fi.push_back(e.fi);
    c.fir.push_back(e.fir);
    c.mmse.push_back(mmse);
    c.resistance.push_back(r);
    c.flags.push_back(curve_flags(e.fi, e.fir, mmse, r));
  }
  return c;
}

DiagnosticCurve analytic_curve(const TauGrid& grid, Index dim, const std::vector<double>& fi,
                               const std::vector<double>& fir, const std::string& id) {
  require(fi.size() == grid.size() && fir.size() == grid.size(), "analytic values must match the grid");
  DiagnosticCurve c;
  c.grid = grid;
  c.dim = dim;
  c.oracle_id = id;
  c.fir_method = "exact";
  c.probe = "none";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EstimateWithError a;
    a.mean = fi[i];
    EstimateWithError b;
    b.mean = fir[i];
    const double tau = grid[i];
    const double mmse = mmse_from_fi(tau, dim, fi[i]);
    const Resistance r = denoising_resistance(tau, dim, fi[i], fir[i]);
    c.fi.push_back(a);
    c.fir.push_back(b);
    c.mmse.push_back(mmse);
    c.resistance.push_back(r);
    c.flags.push_back(curve_flags(a, b, mmse, r));
  }
  return c;
}

report::CsvTable curve_to_table(const DiagnosticCurve& c) {
  c.validate();
  report::CsvTable t;
  t.header = {"tau",  "sqrt_tau",         "fi_mean",    "fi_stderr",         "fir_mean",
              "fir_stderr", "mmse", "resistance_total", "noise_gain", "complexity_penalty"};
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double tau = c.grid[i];
    t.rows.push_back({tau, std::sqrt(tau), c.fi[i].mean, c.fi[i].std_error, c.fir[i].mean,
                      c.fir[i].clustered_std_error, c.mmse[i], c.resistance[i].total, c.resistance[i].noise_gain,
                      c.resistance[i].complexity_penalty});
  }
  return t;
}

DiagnosticCurve curve_from_table(const report::CsvTable& t) {
  const Index tau_c = t.column("tau");
  const Index fi_c = t.column("fi_mean");
  const Index fi_se = t.column("fi_stderr");
  const Index fir_c = t.column("fir_mean");
  const Index fir_se = t.column("fir_stderr");
  const Index mmse_c = t.column("mmse");
  const Index tot_c = t.column("resistance_total");
  const Index gain_c = t.column("noise_gain");
  const Index pen_c = t.column("complexity_penalty");
  DiagnosticCurve c;
  std::vector<double> taus;
  for (const auto& row : t.rows) {
    auto at = [&row](Index j) { return row[static_cast<std::size_t>(j)]; };
    taus.push_back(at(tau_c));
    EstimateWithError a;
    a.mean = at(fi_c);
    a.std_error = a.clustered_std_error = at(fi_se);
    EstimateWithError b;
    b.mean = at(fir_c);
    b.std_error = b.clustered_std_error = at(fir_se);
    c.fi.push_back(a);
    c.fir.push_back(b);
    c.mmse.push_back(at(mmse_c));
    c.resistance.push_back({at(tot_c), at(gain_c), at(pen_c)});
    c.flags.push_back(curve_flags(a, b, c.mmse.back(), c.resistance.back()));
  }
  c.grid = TauGrid::custom(std::move(taus));
  return c;
}

void write_curve_csv(const std::string& path, const DiagnosticCurve& c) {
  report::write_csv(path, curve_to_table(c));
}

DiagnosticCurve read_curve_csv(const std::string& path) { return curve_from_table(report::read_csv(path, true)); }

namespace {

nlohmann::json estimate_json(const EstimateWithError& e) {
  return {{"mean", e.mean},
          {"stderr", e.std_error},
          {"clustered_stderr", e.clustered_std_error},
          {"n_samples", e.n_samples},
          {"n_probes", e.n_probes}};
}

}  // namespace

nlohmann::json curve_to_json(const DiagnosticCurve& c) {
  c.validate();
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    nlohmann::json flags = nlohmann::json::array();
    if (c.flags[i] & kFlagHighStderr) flags.push_back("high_stderr");
    if (c.flags[i] & kFlagNegativeMmse) flags.push_back("negative_mmse");
    if (c.flags[i] & kFlagNegativeResistance) flags.push_back("negative_resistance");
    points.push_back({{"tau", c.grid[i]},
                      {"fi", estimate_json(c.fi[i])},
                      {"fir", estimate_json(c.fir[i])},
                      {"mmse", c.mmse[i]},
                      {"resistance_total", c.resistance[i].total},
                      {"noise_gain", c.resistance[i].noise_gain},
                      {"complexity_penalty", c.resistance[i].complexity_penalty},
                      {"flags", flags}});
  }
  return {{"provenance",
           {{"oracle", c.oracle_id},
            {"seed", c.seed},
            {"n", c.n},
            {"m_probes", c.m_probes},
            {"fir_method", c.fir_method},
            {"probe", c.probe}}},
          {"dim", c.dim},
          {"grid", {{"spacing", spacing_name(c.grid.spacing)}, {"size", c.size()}}},
          {"points", points}};
}

report::CsvTable deviation_table(const DiagnosticCurve& ambient, const DiagnosticCurve& latent, Index big_d,
                                 Index d, Index m) {
  require_same_grid(ambient.grid, latent.grid);
  const bool scaled = big_d > m && d > m;
  report::CsvTable t;
  t.header = {"tau", "fir_ambient", "fir_latent", "deviation"};
  if (scaled) t.header.push_back("scaled_deviation");
  for (std::size_t i = 0; i < ambient.size(); ++i) {
    const double ra = ambient.fir[i].mean;
    const double rl = latent.fir[i].mean;
    std::vector<double> row = {ambient.grid[i], ra, rl, fir_deviation(ra, rl)};
    if (scaled) row.push_back(fir_deviation_scaled(ra, rl, big_d, d, m));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace diffu
