#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "tmfwc/audio.hpp"
#include "tmfwc/feature_matrix.hpp"
#include "tmfwc/mel.hpp"
#include "tmfwc/melwave.hpp"
#include "tmfwc/mfcc.hpp"
#include "tmfwc/wavelet.hpp"

namespace tmfwc {

enum class ExtractorKind { Tmfwc, Mfcc, Dwt };

std::string_view to_string(ExtractorKind kind) noexcept;
ExtractorKind extractor_kind_from_string(std::string_view name);

struct ExtractorSettings {
  ExtractorKind kind = ExtractorKind::Tmfwc;
  TmfwcConfig tmfwc;
  // Component table overlaid on the derived one; empty path = derived only.
  std::filesystem::path table_path;
  MelFilterbankSpec mfcc_filterbank{25, 0.0, 4000.0, 1024, 8000};
  MfccConfig mfcc;
  DwtFeatureConfig dwt;
  int sample_rate_hz = 8000;
};

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual ExtractorKind kind() const noexcept = 0;
  virtual std::size_t output_dim() const noexcept = 0;
  virtual FeatureMatrix extract(const AudioBuffer& buf) const = 0;

  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  // Stable description of everything that affects the output.
  const std::string& cache_key() const noexcept { return cache_key_; }

 protected:
  FeatureExtractor(int sample_rate_hz, std::string cache_key)
      : sample_rate_hz_(sample_rate_hz), cache_key_(std::move(cache_key)) {}

  // Throws SampleRateMismatch; resampling is not performed.
  void check_rate(const AudioBuffer& buf) const;

 private:
  int sample_rate_hz_;
  std::string cache_key_;
};

// Builds the extractor for settings.kind. For TMFWC the table is derived
// from settings.tmfwc.filterbank, with settings.table_path overlaid.
std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorSettings& settings);

// The table the TMFWC extractor would use for these settings.
MelComponentTable resolve_component_table(const ExtractorSettings& settings);

}  // namespace tmfwc
