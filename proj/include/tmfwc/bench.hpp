#pragma once

#include <cstddef>
#include <vector>

#include "tmfwc/dataset.hpp"
#include "tmfwc/experiment.hpp"
#include "tmfwc/extractor.hpp"
#include "tmfwc/melwave.hpp"

namespace tmfwc {

struct BenchmarkConfig {
  std::size_t repetitions = 20;
  std::size_t warmups = 3;
  // Adds a "tmfwc-fftconv" row after each TMFWC row.
  bool include_fft_convolution = false;
};

// TMFWC features computed with FFT convolution instead of the direct loop.
// Matches ex.extract up to rounding; used only as a cost reference. Counts
// one forward transform of the signal, two kernel transforms and two
// inverses per channel, and 4 MACs per complex spectral product.
FeatureMatrix tmfwc_extract_fft_convolution(const TmfwcExtractor& ex, const AudioBuffer& buf);

// Times each extractor on the calling thread only. Audio is decoded before
// timing starts. One repetition is a pass over every utterance; the median
// repetition is reported per utterance. Operation counts come from a single
// separate pass and are exact.
std::vector<TimingRecord> benchmark_extraction(const std::vector<Utterance>& data,
                                               const std::vector<ExtractorSettings>& extractors,
                                               const BenchmarkConfig& cfg = {});

// The three standard paths (TMFWC, MFCC, DWT) derived from one settings block.
std::vector<ExtractorSettings> standard_benchmark_settings(const ExtractorSettings& base);

}  // namespace tmfwc
