#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "tmfwc/melwave.hpp"
#include "tmfwc/wavelet.hpp"

namespace testutil {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tmfwc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> tone(double freq_hz, int rate, std::size_t n, double amp = 0.5,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::cos(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate + phase);
  }
  return x;
}

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

// Direct DFT of a complex sequence at one frequency (Hz). Evaluated on the
// grid k * fs / nfft this is the zero-padded DFT bin k.
inline std::complex<double> complex_kernel_response(const tmfwc::MelWaveKernel& k, double freq_hz) {
  std::complex<double> acc = 0.0;
  const double w = 2.0 * std::numbers::pi * freq_hz / k.sample_rate_hz;
  for (std::size_t n = 0; n < k.kernel_len(); ++n) {
    const std::complex<double> c(k.real_kernel[n], k.imag_kernel[n]);
    acc += c * std::polar(1.0, -w * static_cast<double>(n));
  }
  return acc;
}

// Inverse of one periodized analysis step (test oracle only).
inline std::vector<double> inverse_dwt_level(const std::vector<double>& approx,
                                             const std::vector<double>& detail,
                                             tmfwc::WaveletFamily family) {
  const auto h = tmfwc::lowpass_filter(family);
  const auto g = tmfwc::highpass_filter(family);
  const std::size_t n = 2 * approx.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < approx.size(); ++k) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      x[(2 * k + j) % n] += h[j] * approx[k] + g[j] * detail[k];
    }
  }
  return x;
}

inline std::vector<double> inverse_dwt(const tmfwc::WaveletDecomposition& d,
                                       tmfwc::WaveletFamily family) {
  std::vector<double> current = d.approximation;
  for (auto it = d.details.rbegin(); it != d.details.rend(); ++it) {
    current = inverse_dwt_level(current, *it, family);
  }
  return current;
}

inline double rms(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i] * v[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

}  // namespace testutil
