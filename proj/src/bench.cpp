#include "tmfwc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <complex>
#include <functional>

#include <fmt/format.h>

#include "tmfwc/audio.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/op_counters.hpp"
#include "tmfwc/spectrum.hpp"

namespace tmfwc {

namespace {

using Spectrum = std::vector<std::complex<double>>;

std::vector<double> inverse_product(const Spectrum& x, const Spectrum& k, std::size_t n) {
  Spectrum prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = x[i] * k[i];
  thread_op_counters().macs += 4 * x.size();
  return inverse_real_fft(prod, n);
}

using ExtractFn = std::function<FeatureMatrix(const AudioBuffer&)>;

TimingRecord time_path(const std::string& name, const std::vector<AudioBuffer>& audio,
                       const ExtractFn& extract, const BenchmarkConfig& cfg) {
  TimingRecord rec;
  rec.extractor = name;
  rec.utterances = audio.size();
  rec.repetitions = cfg.repetitions;
  {
    const ScopedOpCount ops;
    for (const auto& buf : audio) rec.total_frames += extract(buf).rows();
    rec.total_macs = ops.delta().macs;
    rec.total_transforms = ops.delta().transforms;
  }
  for (std::size_t w = 0; w < cfg.warmups; ++w) {
    for (const auto& buf : audio) (void)extract(buf);
  }
  std::vector<double> per_utt_ms;
  per_utt_ms.reserve(cfg.repetitions);
  for (std::size_t r = 0; r < cfg.repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& buf : audio) (void)extract(buf);
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    per_utt_ms.push_back(dt.count() / static_cast<double>(audio.size()));
  }
  std::sort(per_utt_ms.begin(), per_utt_ms.end());
  const std::size_t n = per_utt_ms.size();
  rec.median_ms_per_utterance =
      n % 2 ? per_utt_ms[n / 2] : 0.5 * (per_utt_ms[n / 2 - 1] + per_utt_ms[n / 2]);
  return rec;
}

}  // namespace

FeatureMatrix tmfwc_extract_fft_convolution(const TmfwcExtractor& ex, const AudioBuffer& buf) {
  const auto x = buf.samples();
  const std::size_t pool = ex.pool_window_samples();
  const std::size_t rows = (x.size() + pool - 1) / pool;
  const auto& kernels = ex.kernels();
  FeatureMatrix out(rows, kernels.size());
  std::size_t longest = 0;
  for (const auto& k : kernels) longest = std::max(longest, k.kernel_len());
  std::size_t n = 1;
  while (n < x.size() + longest - 1) n <<= 1;

  const Spectrum xs = real_fft(x, n);
  std::vector<double> env(x.size());
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    const auto& k = kernels[c];
    if (k.sample_rate_hz != buf.sample_rate_hz()) {
      throw Error(ErrorCode::SampleRateMismatch,
                  fmt::format("kernel at {} Hz, signal at {} Hz", k.sample_rate_hz, buf.sample_rate_hz()));
    }
    const auto re = inverse_product(xs, real_fft(k.real_kernel, n), n);
    const auto im = inverse_product(xs, real_fft(k.imag_kernel, n), n);
    const std::size_t lag = (k.kernel_len() - 1) / 2;
    for (std::size_t i = 0; i < x.size(); ++i) env[i] = std::hypot(re[i + lag], im[i + lag]);
    const auto pooled = abs_max_pool(env, pool);
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = pooled[r];
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < kernels.size(); ++c) names.push_back(fmt::format("m{}", c + 1));
  out.set_column_names(std::move(names));
  normalize_max(out);
  return out;
}

std::vector<ExtractorSettings> standard_benchmark_settings(const ExtractorSettings& base) {
  std::vector<ExtractorSettings> out;
  for (ExtractorKind kind : {ExtractorKind::Tmfwc, ExtractorKind::Mfcc, ExtractorKind::Dwt}) {
    ExtractorSettings s = base;
    s.kind = kind;
    out.push_back(s);
  }
  return out;
}

std::vector<TimingRecord> benchmark_extraction(const std::vector<Utterance>& data,
                                               const std::vector<ExtractorSettings>& extractors,
                                               const BenchmarkConfig& cfg) {
  if (data.empty()) throw Error(ErrorCode::EmptyDataset, "benchmark needs at least one utterance");
  if (cfg.repetitions < 1) throw Error(ErrorCode::ConfigInvalid, "benchmark repetitions must be >= 1");

  std::vector<AudioBuffer> audio;
  audio.reserve(data.size());
  for (const auto& u : data) audio.push_back(load_wav(u.path));

  std::vector<TimingRecord> out;
  for (const auto& settings : extractors) {
    const auto extractor = make_extractor(settings);
    out.push_back(time_path(std::string(to_string(settings.kind)), audio,
                            [&](const AudioBuffer& b) { return extractor->extract(b); }, cfg));
    if (cfg.include_fft_convolution && settings.kind == ExtractorKind::Tmfwc) {
      TmfwcConfig tc = settings.tmfwc;
      tc.filterbank.sample_rate_hz = settings.sample_rate_hz;
      const TmfwcExtractor direct(tc, resolve_component_table(settings));
      out.push_back(time_path("tmfwc-fftconv", audio,
                              [&](const AudioBuffer& b) { return tmfwc_extract_fft_convolution(direct, b); },
                              cfg));
    }
  }
  return out;
}

}  // namespace tmfwc
