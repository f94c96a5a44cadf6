#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tmfwc/audio.hpp"
#include "tmfwc/feature_matrix.hpp"
#include "tmfwc/framing.hpp"
#include "tmfwc/mel.hpp"

namespace tmfwc {

// Filter index convention inside cos(pi n (m - 0.5) / M).
enum class CepstrumPhase {
  // m runs over filters 1..M, i.e. cos(pi n (i + 0.5) / M) for a 0-based
  // filter index i. Flat log spectra map to c(0) only.
  OneBasedFilters,
  // m runs over 0..M-1 with the same (m - 0.5) term. Kept for comparison;
  // leaves a ripple in odd coefficients for flat input.
  ZeroBasedFilters,
};

struct MfccConfig {
  std::size_t num_ceps = 13;
  bool include_c0 = false;
  bool append_deltas = false;
  std::size_t delta_width = 2;
  double floor_eps = 1e-10;
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  WindowKind window = WindowKind::Hamming;
  CepstrumPhase phase = CepstrumPhase::OneBasedFilters;

  void validate(const MelFilterbankSpec& spec) const;
};

// c(n) = sum_m log10(max(s(m), floor_eps)) cos(pi n (m - 0.5) / M).
// Returns n = 0..C-1 with c0, or n = 1..C without.
std::vector<double> dct_cepstrum(std::span<const double> energies, std::size_t num_ceps,
                                 double floor_eps, bool include_c0 = true,
                                 CepstrumPhase phase = CepstrumPhase::OneBasedFilters);

// d_t = sum_{n=1}^{N} n (c_{t+n} - c_{t-n}) / (2 sum n^2) with boundary
// frames replicated. Trajectory is frames x coefficients.
std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& trajectory,
                                       std::size_t width = 2);

// frame -> window -> |DFT|^2 -> filterbank -> log10 -> cosine transform,
// optionally followed by deltas and delta-deltas.
// Columns: c.., then d.., then dd...
FeatureMatrix mfcc_pipeline(const AudioBuffer& buf, const MelFilterbankSpec& spec,
                            const MfccConfig& cfg);

// Same as above with a prebuilt filterbank (built once, shared read-only).
FeatureMatrix mfcc_pipeline(const AudioBuffer& buf, const MelFilterbankSpec& spec,
                            const MelFilterbank& fb, const MfccConfig& cfg);

}  // namespace tmfwc
