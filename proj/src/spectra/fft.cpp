#include "diffu/spectra/fft.hpp"

#include <cmath>
#include <numbers>

namespace diffu::spectra {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly rather than by repeated multiplication.
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const Complex w(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void bluestein(std::vector<Complex>& x, bool inverse) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for long inputs.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    const double ang = sign * std::numbers::pi * k2 / static_cast<double>(n);
    chirp[k] = Complex(std::cos(ang), std::sin(ang));
  }
  std::vector<Complex> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  radix2(a, false);
  radix2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2(a, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * scale * chirp[k];
}

void transform(std::vector<Complex>& x, bool inverse) {
  if (x.size() <= 1) return;
  if (is_power_of_two(x.size())) {
    radix2(x, inverse);
  } else {
    bluestein(x, inverse);
  }
}

}  // namespace

void fft(std::vector<Complex>& data) { transform(data, false); }

void ifft(std::vector<Complex>& data) {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

std::vector<Complex> naive_dft(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * t) % n) / static_cast<double>(n);
      acc += x[t] * Complex(std::cos(ang), std::sin(ang));
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace diffu::spectra
