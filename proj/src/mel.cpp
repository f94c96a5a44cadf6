#include "tmfwc/mel.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/op_counters.hpp"

namespace tmfwc {

double hz_to_mel(double hz) {
  if (hz < 0.0) throw Error(ErrorCode::NegativeFrequency, fmt::format("{} Hz", hz));
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (mel < 0.0) throw Error(ErrorCode::NegativeFrequency, fmt::format("{} mel", mel));
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

void MelFilterbankSpec::validate() const {
  if (num_filters < 2) throw Error(ErrorCode::ConfigInvalid, "need at least 2 mel filters");
  if (sample_rate_hz <= 0) throw Error(ErrorCode::ConfigInvalid, "sample rate must be positive");
  if (!(f_min_hz >= 0.0) || !(f_min_hz < f_max_hz) || f_max_hz > sample_rate_hz / 2.0) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("need 0 <= f_min ({}) < f_max ({}) <= fs/2 ({})", f_min_hz,
                            f_max_hz, sample_rate_hz / 2.0));
  }
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("fft_size {} is not a power of two", fft_size));
  }
}

std::vector<double> mel_edge_frequencies(const MelFilterbankSpec& spec) {
  spec.validate();
  const double lo = hz_to_mel(spec.f_min_hz);
  const double hi = hz_to_mel(spec.f_max_hz);
  const std::size_t count = spec.num_filters + 2;
  std::vector<double> edges(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double mel = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    edges[i] = mel_to_hz(mel);
  }
  // Pin the end points so the inverse mapping cannot drift past the band.
  edges.front() = spec.f_min_hz;
  edges.back() = spec.f_max_hz;
  return edges;
}

double triangle_response(double f, double left, double center, double right) noexcept {
  if (f <= left || f >= right) return 0.0;
  if (f <= center) return (f - left) / (center - left);
  return (right - f) / (right - center);
}

MelFilterbank build_mel_filterbank(const MelFilterbankSpec& spec) {
  MelFilterbank fb;
  fb.edge_freqs_hz = mel_edge_frequencies(spec);
  const double bin_hz = static_cast<double>(spec.sample_rate_hz) / spec.fft_size;
  for (double f : fb.edge_freqs_hz) {
    fb.edge_bins.push_back(static_cast<std::size_t>(std::lround(f / bin_hz)));
  }
  for (std::size_t i = 0; i + 1 < fb.edge_bins.size(); ++i) {
    if (fb.edge_bins[i] >= fb.edge_bins[i + 1]) {
      throw Error(ErrorCode::DegenerateFilter,
                  fmt::format("edges {} and {} share FFT bin {}; fft_size {} too small for {} "
                              "filters",
                              i, i + 1, fb.edge_bins[i], spec.fft_size, spec.num_filters));
    }
  }
  const std::size_t bins = spec.num_bins();
  for (std::size_t m = 0; m < spec.num_filters; ++m) {
    const auto left = static_cast<double>(fb.edge_bins[m]);
    const auto center = static_cast<double>(fb.edge_bins[m + 1]);
    const auto right = static_cast<double>(fb.edge_bins[m + 2]);
    std::vector<double> row(bins, 0.0);
    for (std::size_t k = fb.edge_bins[m]; k <= fb.edge_bins[m + 2] && k < bins; ++k) {
      row[k] = triangle_response(static_cast<double>(k), left, center, right);
    }
    row[fb.edge_bins[m + 1]] = 1.0;
    fb.weights.push_back(std::move(row));
    fb.center_freqs_hz.push_back(fb.edge_freqs_hz[m + 1]);
  }
  return fb;
}

std::vector<double> apply_filterbank(std::span<const double> power, const MelFilterbank& fb) {
  if (power.size() != fb.num_bins()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("spectrum has {} bins, filterbank expects {}", power.size(),
                            fb.num_bins()));
  }
  std::vector<double> energies(fb.num_filters(), 0.0);
  for (std::size_t m = 0; m < fb.num_filters(); ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) acc += fb.weights[m][k] * power[k];
    energies[m] = acc;
  }
  thread_op_counters().macs += fb.num_filters() * power.size();
  return energies;
}

}  // namespace tmfwc
