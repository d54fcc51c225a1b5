#pragma once

#include <cstdint>
#include <vector>

#include "diffu/estimators/estimators.hpp"
#include "diffu/measures/empirical.hpp"
#include "diffu/report/csv.hpp"

namespace diffu::spectra {

/// Sample-averaged power spectrum. 1-D reports are two-sided with bins
/// j = 0..k-1 at frequency j/k and power |X_j|^2 / k^2, so that the powers
/// sum to ||x||^2 / k. 2-D reports are radially averaged over integer-radius
/// annuli of the signed frequency index.
struct SpectrumReport {
  std::vector<int> bins;
  std::vector<double> frequencies;  // cycles per sample (1-D) or radius / max(H, W) (2-D)
  std::vector<double> power;
  std::size_t samples = 0;
  bool dc_excluded = false;
  bool normalized = false;
  double total_power = 0.0;  // sum of all DFT-bin powers including DC, before binning

  report::CsvTable to_table() const;
};

/// Per-vector standardization: subtract the mean and divide by the
/// population std (constant vectors are only centred).
void standardize(std::vector<double>& v);

SpectrumReport power_spectrum_1d(const Matrix& samples, bool normalize, bool exclude_dc);

/// Each row of `samples` holds one C x H x W image in row-major order.
SpectrumReport power_spectrum_2d(const Matrix& samples, Index channels, Index height, Index width, bool normalize,
                                 bool exclude_dc);

/// Sum of |a - b| over matching bins.
double spectrum_l1(const SpectrumReport& a, const SpectrumReport& b);

struct PermutationContrast {
  double fi_original = 0.0;
  double fi_permuted = 0.0;
  double fir_original = 0.0;
  double fir_permuted = 0.0;
  double fi_difference = 0.0;   // |fi_original - fi_permuted|
  double fir_difference = 0.0;
  double spectrum_l1 = 0.0;
  bool identity = false;
};

/// FI and FIR of the mixture and of its coordinate-permuted copy, evaluated
/// at matched points (x and P x, probes v and P v), next to the L1 distance
/// between the atoms' 1-D spectra before and after permuting.
PermutationContrast permutation_contrast(const EmpiricalMeasure& m, const std::vector<Index>& perm, double tau,
                                         std::size_t n = 1000, std::size_t m_probes = 10, std::uint64_t seed = 0);

/// Uniformly random permutation of 0..k-1 from the seeded stream.
std::vector<Index> random_permutation(Index k, std::uint64_t seed);

}  // namespace diffu::spectra
