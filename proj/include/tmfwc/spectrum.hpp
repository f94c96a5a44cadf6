#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tmfwc {

enum class DftMode {
  Fft,     // FFTW real-to-complex transform
  Direct,  // O(N^2) evaluation of X(k) = sum_n x(n) e^{-j 2 pi n k / N}
};

// |X(k)|^2 for k = 0..fft_size/2, frame zero-padded to fft_size.
// Both modes count as one frequency-domain transform.
std::vector<double> dft_power_spectrum(std::span<const double> frame, std::size_t fft_size,
                                       DftMode mode = DftMode::Fft);

// Half-spectrum forward transform (n/2 + 1 bins) and its inverse.
std::vector<std::complex<double>> real_fft(std::span<const double> x, std::size_t n);
std::vector<double> inverse_real_fft(std::span<const std::complex<double>> spectrum,
                                     std::size_t n);

}  // namespace tmfwc
