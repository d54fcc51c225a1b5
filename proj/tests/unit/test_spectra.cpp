#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "diffu/common/error.hpp"
#include "diffu/measures/measure_io.hpp"
#include "diffu/spectra/fft.hpp"
#include "diffu/spectra/spectrum.hpp"

using namespace diffu;
using namespace diffu::spectra;

namespace {

std::vector<Complex> random_signal(std::size_t n, std::uint64_t seed) {
  const Matrix r = standard_normal_rows(static_cast<Index>(n), 2, seed);
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = {r(static_cast<Index>(i), 0), r(static_cast<Index>(i), 1)};
  return x;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Fft, MatchesNaiveDft) {
  for (std::size_t n : {1u, 2u, 8u, 64u, 3u, 12u, 100u, 257u}) {
    auto x = random_signal(n, n);
    const auto ref = naive_dft(x);
    fft(x);
    EXPECT_LT(max_diff(x, ref), 1e-10 * static_cast<double>(n)) << n;
  }
}

TEST(Fft, InverseRoundTrip) {
  for (std::size_t n : {16u, 30u}) {
    const auto orig = random_signal(n, 5);
    auto x = orig;
    fft(x);
    ifft(x);
    EXPECT_LT(max_diff(x, orig), 1e-12);
  }
  EXPECT_TRUE(is_power_of_two(64));
  EXPECT_FALSE(is_power_of_two(48));
}

TEST(Fft, Parseval) {
  auto x = random_signal(96, 3);
  double time = 0.0;
  for (auto v : x) time += std::norm(v);
  fft(x);
  double freq = 0.0;
  for (auto v : x) freq += std::norm(v);
  EXPECT_NEAR(freq / 96.0, time, 1e-10 * time);
}

TEST(Spectrum1d, PowersSumToMeanSquaredNorm) {
  const Matrix s = standard_normal_rows(20, 32, 7);
  const auto r = power_spectrum_1d(s, false, false);
  ASSERT_EQ(r.bins.size(), 32u);
  double total = 0.0;
  for (double p : r.power) total += p;
  const double expect = s.rowwise().squaredNorm().mean() / 32.0;
  EXPECT_NEAR(total, expect, 1e-12 * expect);
  EXPECT_NEAR(r.total_power, expect, 1e-12 * expect);
  EXPECT_EQ(r.samples, 20u);
}

TEST(Spectrum1d, ReversalKeepsPower) {
  const Matrix s = standard_normal_rows(5, 24, 8);
  const Matrix rev = s.rowwise().reverse();
  const auto a = power_spectrum_1d(s, false, false);
  const auto b = power_spectrum_1d(rev, false, false);
  for (std::size_t j = 0; j < a.power.size(); ++j) EXPECT_NEAR(a.power[j], b.power[j], 1e-12);
}

TEST(Spectrum1d, ConstantSignalHasNoPowerOffDc) {
  const Matrix s = Matrix::Constant(3, 16, 2.5);
  const auto r = power_spectrum_1d(s, false, true);
  EXPECT_TRUE(r.dc_excluded);
  EXPECT_EQ(r.bins.size(), 15u);
  for (double p : r.power) EXPECT_NEAR(p, 0.0, 1e-24);
  const auto norm = power_spectrum_1d(s, true, true);
  for (double p : norm.power) EXPECT_NEAR(p, 0.0, 1e-24);
}

TEST(Spectrum1d, SinusoidLandsInItsBin) {
  const Index k = 64;
  Matrix s(1, k);
  for (Index i = 0; i < k; ++i) s(0, i) = std::sin(2 * std::numbers::pi * 5.0 * static_cast<double>(i) / k);
  const auto r = power_spectrum_1d(s, false, true);
  double total = 0.0;
  for (double p : r.power) total += p;
  double at = 0.0;
  for (std::size_t j = 0; j < r.bins.size(); ++j)
    if (r.bins[j] == 5 || r.bins[j] == k - 5) at += r.power[j];
  EXPECT_NEAR(at, total, 1e-12);
  EXPECT_NEAR(total, 0.5, 1e-12);
}

TEST(Spectrum1d, WhiteNoiseIsFlat) {
  const Matrix s = standard_normal_rows(10000, 64, 9);
  const auto r = power_spectrum_1d(s, false, true);
  double mean = 0.0;
  for (double p : r.power) mean += p;
  mean /= static_cast<double>(r.power.size());
  for (double p : r.power) EXPECT_LT(std::abs(p / mean - 1.0), 0.05);
}

TEST(Spectrum1d, StandardizeAndErrors) {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  standardize(v);
  double m = 0.0, sq = 0.0;
  for (double x : v) m += x;
  for (double x : v) sq += x * x;
  EXPECT_NEAR(m, 0.0, 1e-15);
  EXPECT_NEAR(sq / 4.0, 1.0, 1e-14);
  std::vector<double> c = {3.0, 3.0};
  standardize(c);
  EXPECT_EQ(c[0], 0.0);
  EXPECT_THROW(power_spectrum_1d(Matrix(0, 4), false, false), ValidationError);
}

TEST(Spectrum2d, CheckerboardIsNyquist) {
  const Index h = 8, w = 8;
  Matrix s(1, h * w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) s(0, i * w + j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
  const auto r = power_spectrum_2d(s, 1, h, w, false, true);
  const auto best = std::max_element(r.power.begin(), r.power.end()) - r.power.begin();
  // Signed index (-4, -4) has radius 4 sqrt(2), the largest annulus.
  EXPECT_EQ(r.bins[static_cast<std::size_t>(best)], static_cast<int>(std::lround(4 * std::sqrt(2.0))));
  double rest = 0.0;
  for (std::size_t j = 0; j < r.power.size(); ++j)
    if (static_cast<long>(j) != best) rest += r.power[j];
  EXPECT_NEAR(rest, 0.0, 1e-20);
}

TEST(Spectrum2d, WhiteNoiseIsFlat) {
  const Matrix s = standard_normal_rows(400, 3 * 16 * 16, 11);
  const auto r = power_spectrum_2d(s, 3, 16, 16, false, true);
  double mean = 0.0;
  for (double p : r.power) mean += p;
  mean /= static_cast<double>(r.power.size());
  // Annuli hold different numbers of bins, so compare per-bin averages loosely.
  for (double p : r.power) EXPECT_LT(std::abs(p / mean - 1.0), 0.2);
  EXPECT_THROW(power_spectrum_2d(s, 3, 16, 15, false, true), ValidationError);
}

TEST(Permutation, IdentityGivesZeroContrast) {
  const EmpiricalMeasure e(standard_normal_rows(40, 8, 12));
  std::vector<Index> id(8);
  for (Index i = 0; i < 8; ++i) id[static_cast<std::size_t>(i)] = i;
  const auto c = permutation_contrast(e, id, 0.3, 200, 4, 13);
  EXPECT_TRUE(c.identity);
  EXPECT_EQ(c.fi_difference, 0.0);
  EXPECT_EQ(c.fir_difference, 0.0);
  EXPECT_EQ(c.spectrum_l1, 0.0);
}

TEST(Permutation, PreservesFisherButChangesSpectrum) {
  Matrix rows(60, 32);
  for (Index i = 0; i < 60; ++i)
    for (Index j = 0; j < 32; ++j) rows(i, j) = std::sin(2 * std::numbers::pi * (1 + i % 3) * j / 32.0 + 0.1 * i);
  const EmpiricalMeasure e(rows);
  const auto perm = random_permutation(32, 14);
  const auto c = permutation_contrast(e, perm, 0.3, 200, 4, 15);
  EXPECT_FALSE(c.identity);
  EXPECT_LE(c.fi_difference, 1e-9 * c.fi_original);
  EXPECT_LE(c.fir_difference, 1e-9 * c.fir_original);
  EXPECT_GT(c.spectrum_l1, 0.1);
}

TEST(Permutation, RandomPermutationIsValidAndSeeded) {
  const auto p = random_permutation(50, 3);
  std::vector<bool> seen(50, false);
  for (Index v : p) {
    ASSERT_GE(v, 0);
    ASSERT_LT(v, 50);
    EXPECT_FALSE(seen[static_cast<std::size_t>(v)]);
    seen[static_cast<std::size_t>(v)] = true;
  }
  EXPECT_EQ(p, random_permutation(50, 3));
  EXPECT_NE(p, random_permutation(50, 4));
}
