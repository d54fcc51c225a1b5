#pragma once

#include <complex>
#include <vector>

namespace diffu::spectra {

using Complex = std::complex<double>;

/// In-place forward DFT, X_j = sum_n x_n exp(-2 pi i j n / N). Powers of
/// two use an iterative radix-2 transform; other lengths go through
/// Bluestein's chirp-z algorithm.
void fft(std::vector<Complex>& data);
void ifft(std::vector<Complex>& data);

/// O(N^2) reference transform.
std::vector<Complex> naive_dft(const std::vector<Complex>& x);

bool is_power_of_two(std::size_t n);

}  // namespace diffu::spectra
