#include "tmfwc/extractor.hpp"

#include <sstream>

#include <fmt/format.h>

#include "tmfwc/config.hpp"
#include "tmfwc/error.hpp"

namespace tmfwc {

std::string_view to_string(ExtractorKind kind) noexcept {
  switch (kind) {
    case ExtractorKind::Tmfwc: return "tmfwc";
    case ExtractorKind::Mfcc: return "mfcc";
    case ExtractorKind::Dwt: return "dwt";
  }
  return "tmfwc";
}

ExtractorKind extractor_kind_from_string(std::string_view name) {
  if (name == "tmfwc") return ExtractorKind::Tmfwc;
  if (name == "mfcc") return ExtractorKind::Mfcc;
  if (name == "dwt") return ExtractorKind::Dwt;
  throw Error(ErrorCode::ConfigInvalid, "unknown extractor '" + std::string(name) + "'");
}

void FeatureExtractor::check_rate(const AudioBuffer& buf) const {
  if (buf.sample_rate_hz() != sample_rate_hz_) {
    throw Error(ErrorCode::SampleRateMismatch,
                fmt::format("audio at {} Hz, extractor expects {} Hz", buf.sample_rate_hz(),
                            sample_rate_hz_));
  }
}

namespace {

TmfwcConfig rated(TmfwcConfig cfg, int rate) {
  cfg.filterbank.sample_rate_hz = rate;
  return cfg;
}

MelFilterbankSpec rated(MelFilterbankSpec spec, int rate) {
  spec.sample_rate_hz = rate;
  return spec;
}

class TmfwcFeatureExtractor final : public FeatureExtractor {
 public:
  TmfwcFeatureExtractor(const ExtractorSettings& s, const MelComponentTable& table,
                        std::string key)
      : FeatureExtractor(s.sample_rate_hz, std::move(key)),
        impl_(rated(s.tmfwc, s.sample_rate_hz), table) {}

  ExtractorKind kind() const noexcept override { return ExtractorKind::Tmfwc; }
  std::size_t output_dim() const noexcept override { return impl_.kernels().size(); }
  FeatureMatrix extract(const AudioBuffer& buf) const override {
    check_rate(buf);
    return impl_.extract(buf);
  }

 private:
  TmfwcExtractor impl_;
};

class MfccFeatureExtractor final : public FeatureExtractor {
 public:
  MfccFeatureExtractor(const ExtractorSettings& s, std::string key)
      : FeatureExtractor(s.sample_rate_hz, std::move(key)),
        spec_(rated(s.mfcc_filterbank, s.sample_rate_hz)),
        cfg_(s.mfcc),
        fb_(build_mel_filterbank(spec_)) {
    cfg_.validate(spec_);
  }

  ExtractorKind kind() const noexcept override { return ExtractorKind::Mfcc; }
  std::size_t output_dim() const noexcept override {
    return cfg_.append_deltas ? 3 * cfg_.num_ceps : cfg_.num_ceps;
  }
  FeatureMatrix extract(const AudioBuffer& buf) const override {
    check_rate(buf);
    return mfcc_pipeline(buf, spec_, fb_, cfg_);
  }

 private:
  MelFilterbankSpec spec_;
  MfccConfig cfg_;
  MelFilterbank fb_;
};

class DwtFeatureExtractor final : public FeatureExtractor {
 public:
  DwtFeatureExtractor(const ExtractorSettings& s, std::string key)
      : FeatureExtractor(s.sample_rate_hz, std::move(key)), cfg_(s.dwt) {
    if (cfg_.wavelet.levels < 1) throw Error(ErrorCode::ConfigInvalid, "dwt levels must be >= 1");
  }

  ExtractorKind kind() const noexcept override { return ExtractorKind::Dwt; }
  std::size_t output_dim() const noexcept override { return cfg_.wavelet.levels + 1; }
  FeatureMatrix extract(const AudioBuffer& buf) const override {
    check_rate(buf);
    return dwt_features(buf, cfg_);
  }

 private:
  DwtFeatureConfig cfg_;
};

}  // namespace

MelComponentTable resolve_component_table(const ExtractorSettings& settings) {
  const TmfwcConfig cfg = rated(settings.tmfwc, settings.sample_rate_hz);
  cfg.validate();
  MelComponentTable table = derive_component_table(cfg.filterbank, cfg.component_spacing_hz);
  if (!settings.table_path.empty()) {
    table = overlay_component_table(table, load_component_table(settings.table_path));
  }
  return table;
}

std::unique_ptr<FeatureExtractor> make_extractor(const ExtractorSettings& settings) {
  if (settings.sample_rate_hz <= 0) throw Error(ErrorCode::ConfigInvalid, "sample rate must be positive");
  // Only the active extractor's settings go into the key; for TMFWC the
  // table contents replace the table path.
  Json desc = extractor_settings_to_json(settings);
  desc.erase("table");
  for (const char* other : {"tmfwc", "mfcc", "dwt"}) {
    if (desc["kind"] != other) desc.erase(other);
  }
  std::string key = desc.dump();

  switch (settings.kind) {
    case ExtractorKind::Tmfwc: {
      const MelComponentTable table = resolve_component_table(settings);
      std::ostringstream csv;
      write_component_table(csv, table);
      key += csv.str();
      return std::make_unique<TmfwcFeatureExtractor>(settings, table, std::move(key));
    }
    case ExtractorKind::Mfcc:
      return std::make_unique<MfccFeatureExtractor>(settings, std::move(key));
    case ExtractorKind::Dwt:
      return std::make_unique<DwtFeatureExtractor>(settings, std::move(key));
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown extractor kind");
}

}  // namespace tmfwc
