#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "tmfwc/audio.hpp"
#include "tmfwc/feature_matrix.hpp"
#include "tmfwc/mel.hpp"

namespace tmfwc {

// Peak "parameter" of the published channel-1 component list.
inline constexpr double kReferencePeakParameter = 0.009818787;

struct MelComponent {
  double freq_hz = 0.0;
  double parameter = 0.0;

  bool operator==(const MelComponent&) const = default;
};

// Per mel channel, the (frequency, parameter) pairs whose sinusoids are
// superposed into that channel's time-domain kernel.
struct MelComponentTable {
  std::vector<std::vector<MelComponent>> channels;

  std::size_t num_channels() const noexcept { return channels.size(); }
  // Throws ConfigInvalid on empty channels, non-increasing frequencies or
  // non-positive parameters.
  void validate() const;

  bool operator==(const MelComponentTable&) const = default;
};

// CSV with header `channel,freq_hz,parameter`; channels are numbered from 1.
void write_component_table(std::ostream& out, const MelComponentTable& table);
void save_component_table(const std::filesystem::path& path, const MelComponentTable& table);
MelComponentTable read_component_table(std::istream& in);
MelComponentTable load_component_table(const std::filesystem::path& path);

// Samples a unit-peak triangle at left + k * spacing (k >= 1) strictly inside
// (left, right), scales by peak_parameter and keeps positive weights.
std::vector<MelComponent> sample_triangle(double left, double center, double right,
                                          double spacing_hz, double peak_parameter);

// One channel per mel filter of `spec`, using its continuous-frequency edges.
// Throws EmptySupport when a filter is too narrow for the grid.
MelComponentTable derive_component_table(const MelFilterbankSpec& spec, double spacing_hz,
                                         double peak_parameter = kReferencePeakParameter);

// Replaces the leading channels of `base` with those of `override_table`.
MelComponentTable overlay_component_table(const MelComponentTable& base,
                                          const MelComponentTable& override_table);

enum class KernelTaper { None, Hann };

std::string_view to_string(KernelTaper taper) noexcept;
KernelTaper kernel_taper_from_string(std::string_view name);

struct TmfwcConfig {
  std::size_t num_channels = 10;
  double kernel_ms = 25.0;
  KernelTaper taper = KernelTaper::Hann;
  double pool_window_ms = 8.0;
  double component_spacing_hz = 10.0;
  MelFilterbankSpec filterbank{10, 0.0, 4000.0, 1024, 8000};

  void validate() const;
};

struct MelWaveKernel {
  std::size_t channel_index = 0;
  std::vector<double> real_kernel;  // superposed cosines
  std::vector<double> imag_kernel;  // superposed sines
  int sample_rate_hz = 0;

  std::size_t kernel_len() const noexcept { return real_kernel.size(); }
};

// real(n) = w(n) sum_i p_i cos(2 pi f_i n / fs), imag(n) = w(n) sum_i p_i sin(2 pi f_i n / fs)
// for n < round(kernel_ms * fs / 1000). Throws AliasedComponent if f_i >= fs / 2.
MelWaveKernel synthesize_mel_wave(std::span<const MelComponent> components, int sample_rate_hz,
                                  const TmfwcConfig& cfg, std::size_t channel_index = 0);

struct ChannelResponse {
  std::vector<double> real;
  std::vector<double> imag;
};

// Direct FIR convolution of the signal with both kernel parts, "same"
// alignment: out[i] = sum_j k[j] x[i + (L - 1) / 2 - j]. Each output costs
// kernel_len multiply-accumulates per part.
ChannelResponse convolve_channel(const AudioBuffer& buf, const MelWaveKernel& kernel);

// sqrt(real^2 + imag^2), pointwise.
std::vector<double> magnitude_envelope(std::span<const double> real, std::span<const double> imag);

// Non-overlapping windows; each output is the signed element of largest
// magnitude in its window. Output length ceil(len / window).
std::vector<double> abs_max_pool(std::span<const double> values, std::size_t window);

// Kernels are synthesized once; extraction is a pure function of the input.
class TmfwcExtractor {
 public:
  TmfwcExtractor(const TmfwcConfig& cfg, const MelComponentTable& table);

  const TmfwcConfig& config() const noexcept { return cfg_; }
  const std::vector<MelWaveKernel>& kernels() const noexcept { return kernels_; }
  std::size_t pool_window_samples() const noexcept { return pool_window_; }

  // Pooled envelopes, one column per channel, before normalization.
  FeatureMatrix extract_unnormalized(const AudioBuffer& buf) const;
  // As above, divided by the matrix maximum so values lie in [0, 1].
  FeatureMatrix extract(const AudioBuffer& buf) const;

 private:
  TmfwcConfig cfg_;
  std::vector<MelWaveKernel> kernels_;
  std::size_t pool_window_;
};

FeatureMatrix tmfwc_extract(const AudioBuffer& buf, const TmfwcConfig& cfg,
                            const MelComponentTable& table);

// Divides every entry by the largest one; an all-zero matrix is returned as is.
void normalize_max(FeatureMatrix& m);

}  // namespace tmfwc
