#include "diffu/spectra/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffu/common/error.hpp"
#include "diffu/common/parallel.hpp"
#include "diffu/common/rng.hpp"
#include "diffu/spectra/fft.hpp"

namespace diffu::spectra {

namespace {

// Samples are reduced in fixed chunks, then the chunk sums are added in
// order, so the average does not depend on the thread count.
constexpr std::size_t kChunk = 64;

template <class PerSample>
std::vector<double> averaged_power(std::size_t n, std::size_t bins, PerSample&& per_sample) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(bins, 0.0));
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    std::vector<double> p(bins);
    for (std::size_t c = b; c < e; ++c) {
      for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
        per_sample(i, p);
        for (std::size_t j = 0; j < bins; ++j) partial[c][j] += p[j];
      }
    }
  });
  std::vector<double> out(bins, 0.0);
  for (const auto& p : partial)
    for (std::size_t j = 0; j < bins; ++j) out[j] += p[j];
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

void fft2(std::vector<Complex>& img, std::size_t h, std::size_t w) {
  std::vector<Complex> line(w);
  for (std::size_t r = 0; r < h; ++r) {
    std::copy(img.begin() + static_cast<std::ptrdiff_t>(r * w), img.begin() + static_cast<std::ptrdiff_t>((r + 1) * w),
              line.begin());
    fft(line);
    std::copy(line.begin(), line.end(), img.begin() + static_cast<std::ptrdiff_t>(r * w));
  }
  line.resize(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) line[r] = img[r * w + c];
    fft(line);
    for (std::size_t r = 0; r < h; ++r) img[r * w + c] = line[r];
  }
}

long signed_index(std::size_t u, std::size_t n) {
  return u <= n / 2 ? static_cast<long>(u) : static_cast<long>(u) - static_cast<long>(n);
}

}  // namespace

void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double& x : v) {
    x -= mean;
    ss += x * x;
  }
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  if (sd > 0.0)
    for (double& x : v) x /= sd;
}

SpectrumReport power_spectrum_1d(const Matrix& samples, bool normalize, bool exclude_dc) {
  const Index k = samples.cols();
  require(k >= 2, "1-D spectrum needs signals of length >= 2");
  require(samples.rows() >= 1, "spectrum needs at least one sample");
  const auto n = static_cast<std::size_t>(k);
  const double norm = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  const auto power = averaged_power(static_cast<std::size_t>(samples.rows()), n, [&](std::size_t i, std::vector<double>& p) {
    std::vector<double> row(n);
    for (Index j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = samples(static_cast<Index>(i), j);
    if (normalize) standardize(row);
    std::vector<Complex> x(row.begin(), row.end());
    fft(x);
    for (std::size_t j = 0; j < n; ++j) p[j] = std::norm(x[j]) * norm;
  });
  SpectrumReport r;
  r.samples = static_cast<std::size_t>(samples.rows());
  r.dc_excluded = exclude_dc;
  r.normalized = normalize;
  r.total_power = std::accumulate(power.begin(), power.end(), 0.0);
  for (std::size_t j = exclude_dc ? 1 : 0; j < n; ++j) {
    r.bins.push_back(static_cast<int>(j));
    r.frequencies.push_back(static_cast<double>(j) / static_cast<double>(n));
    r.power.push_back(power[j]);
  }
  return r;
}

SpectrumReport power_spectrum_2d(const Matrix& samples, Index channels, Index height, Index width, bool normalize,
                                 bool exclude_dc) {
  require(channels >= 1 && height >= 2 && width >= 2, "2-D spectrum needs C >= 1 and H, W >= 2");
  require(samples.cols() == channels * height * width, "sample rows must hold C*H*W values");
  require(samples.rows() >= 1, "spectrum needs at least one sample");
  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  const auto c = static_cast<std::size_t>(channels);
  const std::size_t hw = h * w;
  const double norm = 1.0 / (static_cast<double>(hw) * static_cast<double>(hw));
  // Power per DFT bin, channel-averaged.
  const auto power = averaged_power(static_cast<std::size_t>(samples.rows()), hw, [&](std::size_t i, std::vector<double>& p) {
    std::vector<double> all(c * hw);
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = samples(static_cast<Index>(i), static_cast<Index>(j));
    if (normalize) standardize(all);
    std::fill(p.begin(), p.end(), 0.0);
    std::vector<Complex> img(hw);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < hw; ++j) img[j] = all[ch * hw + j];
      fft2(img, h, w);
      for (std::size_t j = 0; j < hw; ++j) p[j] += std::norm(img[j]) * norm / static_cast<double>(c);
    }
  });

  const int max_bin = static_cast<int>(std::lround(std::hypot(static_cast<double>(h / 2), static_cast<double>(w / 2))));
  std::vector<double> sum(static_cast<std::size_t>(max_bin) + 1, 0.0);
  std::vector<std::size_t> count(sum.size(), 0);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const auto bin = static_cast<std::size_t>(
          std::lround(std::hypot(static_cast<double>(signed_index(u, h)), static_cast<double>(signed_index(v, w)))));
      sum[bin] += power[u * w + v];
      ++count[bin];
    }
  }
  SpectrumReport r;
  r.samples = static_cast<std::size_t>(samples.rows());
  r.dc_excluded = exclude_dc;
  r.normalized = normalize;
  r.total_power = std::accumulate(power.begin(), power.end(), 0.0);
  const double scale = static_cast<double>(std::max(h, w));
  for (std::size_t b = exclude_dc ? 1 : 0; b < sum.size(); ++b) {
    if (count[b] == 0) continue;
    r.bins.push_back(static_cast<int>(b));
    r.frequencies.push_back(static_cast<double>(b) / scale);
    r.power.push_back(sum[b] / static_cast<double>(count[b]));
  }
  return r;
}

report::CsvTable SpectrumReport::to_table() const {
  report::CsvTable t;
  t.header = {"bin", "frequency", "power"};
  for (std::size_t i = 0; i < power.size(); ++i) t.rows.push_back({static_cast<double>(bins[i]), frequencies[i], power[i]});
  return t;
}

double spectrum_l1(const SpectrumReport& a, const SpectrumReport& b) {
  require(a.bins == b.bins, "spectra have different bins");
  double d = 0.0;
  for (std::size_t i = 0; i < a.power.size(); ++i) d += std::abs(a.power[i] - b.power[i]);
  return d;
}

std::vector<Index> random_permutation(Index k, std::uint64_t seed) {
  std::vector<Index> p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), Index{0});
  CounterRng rng(seed, StreamTag::kPermutation, 0);
  for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

PermutationContrast permutation_contrast(const EmpiricalMeasure& m, const std::vector<Index>& perm, double tau,
                                         std::size_t n, std::size_t m_probes, std::uint64_t seed) {
  const Index k = m.dim();
  require(static_cast<Index>(perm.size()) == k, "permutation length must equal the dimension");
  std::vector<Index> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < k; ++i) require(sorted[static_cast<std::size_t>(i)] == i, "not a permutation of 0..k-1");
  check_tau(tau);
  require(n >= 2 && m_probes >= 1, "contrast needs n >= 2 and at least one probe");

  const EmpiricalMeasure permuted = m.permuted_columns(perm);
  auto apply = [&](const Vector& x) {
    Vector y(k);
    for (Index j = 0; j < k; ++j) y(j) = x(perm[static_cast<std::size_t>(j)]);
    return y;
  };
  auto apply_cols = [&](const Matrix& v) {
    Matrix y(k, v.cols());
    for (Index j = 0; j < k; ++j) y.row(j) = v.row(perm[static_cast<std::size_t>(j)]);
    return y;
  };

  const Matrix xs = m.sample(tau, static_cast<Index>(n), seed);
  std::vector<double> fi_a(n), fi_b(n), fir_a(n), fir_b(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vector x = xs.row(static_cast<Index>(i)).transpose();
      const Matrix v = draw_probes(k, static_cast<Index>(m_probes), seed, i, ProbeKind::kRademacher);
      const LocalResponse ra = m.respond(x, tau, v);
      const LocalResponse rb = permuted.respond(apply(x), tau, apply_cols(v));
      fi_a[i] = ra.score.squaredNorm();
      fi_b[i] = rb.score.squaredNorm();
      fir_a[i] = ra.hvps.colwise().squaredNorm().mean();
      fir_b[i] = rb.hvps.colwise().squaredNorm().mean();
    }
  });
  PermutationContrast c;
  c.fi_original = pairwise_sum(fi_a) / static_cast<double>(n);
  c.fi_permuted = pairwise_sum(fi_b) / static_cast<double>(n);
  c.fir_original = pairwise_sum(fir_a) / static_cast<double>(n);
  c.fir_permuted = pairwise_sum(fir_b) / static_cast<double>(n);
  c.fi_difference = std::abs(c.fi_original - c.fi_permuted);
  c.fir_difference = std::abs(c.fir_original - c.fir_permuted);
  c.identity = std::is_sorted(perm.begin(), perm.end());
  if (k >= 2) {
    c.spectrum_l1 = spectrum_l1(power_spectrum_1d(m.samples(), false, true),
                                power_spectrum_1d(permuted.samples(), false, true));
  }
  return c;
}

}  // namespace diffu::spectra
