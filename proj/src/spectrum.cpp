#include "tmfwc/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tmfwc/error.hpp"
#include "tmfwc/op_counters.hpp"

namespace tmfwc {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : forward_) fftw_destroy_plan(p);
    for (auto& [n, p] : inverse_) fftw_destroy_plan(p);
  }

  fftw_plan forward(std::size_t n) { return get(forward_, n, true); }
  fftw_plan inverse(std::size_t n) { return get(inverse_, n, false); }

 private:
  fftw_plan get(std::map<std::size_t, fftw_plan>& cache, std::size_t n, bool fwd) {
    std::lock_guard lock(mutex_);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    std::vector<double> real(n);
    std::vector<std::complex<double>> cplx(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = fwd ? fftw_plan_dft_r2c_1d(len, real.data(), c, flags)
                      : fftw_plan_dft_c2r_1d(len, c, real.data(), flags);
    cache.emplace(n, p);
    return p;
  }

  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> forward_;
  std::map<std::size_t, fftw_plan> inverse_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

std::vector<double> direct_power(std::span<const double> frame, std::size_t n) {
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t t = 0; t < frame.size(); ++t) {
      // Reduce nk mod N before scaling to keep the phase accurate for large N.
      const double phase = -2.0 * std::numbers::pi *
                           static_cast<double>((t * k) % n) / static_cast<double>(n);
      re += frame[t] * std::cos(phase);
      im += frame[t] * std::sin(phase);
    }
    power[k] = re * re + im * im;
  }
  return power;
}

}  // namespace

std::vector<std::complex<double>> real_fft(std::span<const double> x, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidFraming, "transform size must be positive");
  if (x.size() > n) throw Error(ErrorCode::InvalidFraming, "input longer than transform size");
  std::vector<double> in(n, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plans().forward(n), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  ++thread_op_counters().transforms;
  return out;
}

std::vector<double> inverse_real_fft(std::span<const std::complex<double>> spectrum,
                                     std::size_t n) {
  if (spectrum.size() != n / 2 + 1) {
    throw Error(ErrorCode::DimensionMismatch, "half spectrum must hold n/2 + 1 bins");
  }
  // c2r overwrites its input.
  std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans().inverse(n), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  for (double& v : out) v /= static_cast<double>(n);
  ++thread_op_counters().transforms;
  return out;
}

std::vector<double> dft_power_spectrum(std::span<const double> frame, std::size_t fft_size,
                                       DftMode mode) {
  if (frame.empty()) throw Error(ErrorCode::InvalidFraming, "empty frame");
  if (frame.size() > fft_size) {
    throw Error(ErrorCode::InvalidFraming, "frame longer than fft_size");
  }
  if (mode == DftMode::Direct) {
    ++thread_op_counters().transforms;
    return direct_power(frame, fft_size);
  }
  const auto spectrum = real_fft(frame, fft_size);
  std::vector<double> power(spectrum.size());
  std::transform(spectrum.begin(), spectrum.end(), power.begin(),
                 [](const std::complex<double>& z) { return std::norm(z); });
  return power;
}

}  // namespace tmfwc
