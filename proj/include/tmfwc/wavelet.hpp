#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tmfwc/audio.hpp"
#include "tmfwc/feature_matrix.hpp"

namespace tmfwc {

enum class WaveletFamily { Haar, Daubechies4 };

std::string_view to_string(WaveletFamily family) noexcept;
WaveletFamily wavelet_family_from_string(std::string_view name);

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::Daubechies4;
  std::size_t levels = 1;
};

// Orthonormal low-pass decomposition filter h.
std::vector<double> lowpass_filter(WaveletFamily family);
// Quadrature mirror of h: g(k) = (-1)^k h(L - 1 - k).
std::vector<double> highpass_filter(WaveletFamily family);

struct WaveletLevel {
  std::vector<double> approx;
  std::vector<double> detail;
};

// approx[k] = sum_j h[j] x[2k + j], detail[k] = sum_j g[j] x[2k + j].
// An odd-length input is first extended by one mirrored sample; filter taps
// past the end wrap around, so each output holds ceil(len / 2) values and the
// level is exactly invertible. Throws SignalTooShort if len < filter length.
WaveletLevel dwt_single_level(std::span<const double> x, WaveletFamily family);

struct WaveletDecomposition {
  std::vector<double> approximation;          // coarsest low-pass band
  std::vector<std::vector<double>> details;   // details[0] is the finest level
  std::size_t input_length = 0;

  std::size_t coefficient_count() const noexcept;
};

// Mallat cascade: re-decomposes the approximation `levels` times.
// Throws TooManyLevels if levels > floor(log2(len)).
WaveletDecomposition dwt_multilevel(std::span<const double> x, const WaveletSpec& spec);

// One row per band (details finest first, then the approximation), padded
// with zeros to the longest band.
FeatureMatrix decomposition_matrix(const WaveletDecomposition& d);

// Continuous mother wavelet psi(t). Haar is exact; Daubechies-4 is evaluated
// by the refinement-equation cascade on a dyadic grid, interpolated linearly.
double mother_wavelet(WaveletFamily family, double t);
// Support [0, support_end) of psi.
double mother_wavelet_support(WaveletFamily family) noexcept;

// X(a, b) = (1 / sqrt(a)) sum_n x(n) psi((t_n - b) / a) dt, t_n = n / fs.
double cwt_coefficient(const AudioBuffer& x, double scale, double shift_s, WaveletFamily family);

// Framewise DWT band energies used as the wavelet baseline feature.
struct DwtFeatureConfig {
  WaveletSpec wavelet{WaveletFamily::Daubechies4, 4};
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  double floor_eps = 1e-10;
};

// One row per frame: log10 energy of each detail band (finest first) and of
// the final approximation, giving levels + 1 columns.
FeatureMatrix dwt_features(const AudioBuffer& buf, const DwtFeatureConfig& cfg);

}  // namespace tmfwc
