#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tmfwc {

// 2595 log10(1 + f / 700). Throws NegativeFrequency for f < 0.
double hz_to_mel(double hz);
// 700 (10^(m / 2595) - 1). Throws NegativeFrequency for m < 0.
double mel_to_hz(double mel);

struct MelFilterbankSpec {
  std::size_t num_filters = 25;
  double f_min_hz = 0.0;
  double f_max_hz = 4000.0;
  std::size_t fft_size = 1024;
  int sample_rate_hz = 8000;

  std::size_t num_bins() const noexcept { return fft_size / 2 + 1; }
  // Throws ConfigInvalid when an invariant does not hold.
  void validate() const;
};

// num_filters + 2 edge frequencies, uniformly spaced in mel.
std::vector<double> mel_edge_frequencies(const MelFilterbankSpec& spec);

// Continuous-frequency response of a unit-peak triangle on [left, right]
// peaking at center. Zero outside the open support.
double triangle_response(double f, double left, double center, double right) noexcept;

struct MelFilterbank {
  // num_filters rows of num_bins() unit-peak triangular weights.
  std::vector<std::vector<double>> weights;
  std::vector<double> center_freqs_hz;
  std::vector<double> edge_freqs_hz;
  std::vector<std::size_t> edge_bins;

  std::size_t num_filters() const noexcept { return weights.size(); }
  std::size_t num_bins() const noexcept { return weights.empty() ? 0 : weights.front().size(); }
};

// Edges are quantized to round(f * fft_size / fs). Throws DegenerateFilter
// when two adjacent edges land in the same bin.
MelFilterbank build_mel_filterbank(const MelFilterbankSpec& spec);

// s(m) = sum_k weights[m][k] * power[k].
std::vector<double> apply_filterbank(std::span<const double> power, const MelFilterbank& fb);

}  // namespace tmfwc
