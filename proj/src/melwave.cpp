#include "tmfwc/melwave.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/framing.hpp"
#include "tmfwc/op_counters.hpp"

namespace tmfwc {

void MelComponentTable::validate() const {
  if (channels.empty()) throw Error(ErrorCode::ConfigInvalid, "component table has no channels");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& comps = channels[c];
    if (comps.empty()) {
      throw Error(ErrorCode::ConfigInvalid, fmt::format("channel {} has no components", c + 1));
    }
    bool falling = false;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (!(comps[i].parameter > 0.0) || !(comps[i].freq_hz > 0.0)) {
        throw Error(ErrorCode::ConfigInvalid,
                    fmt::format("channel {} component {} must have positive freq and parameter",
                                c + 1, i));
      }
      if (i == 0) continue;
      if (!(comps[i].freq_hz > comps[i - 1].freq_hz)) {
        throw Error(ErrorCode::ConfigInvalid,
                    fmt::format("channel {} frequencies not strictly increasing", c + 1));
      }
      if (comps[i].parameter < comps[i - 1].parameter) {
        falling = true;
      } else if (falling && comps[i].parameter > comps[i - 1].parameter) {
        throw Error(ErrorCode::ConfigInvalid,
                    fmt::format("channel {} parameters do not rise then fall", c + 1));
      }
    }
  }
}

void write_component_table(std::ostream& out, const MelComponentTable& table) {
  out << "channel,freq_hz,parameter\n";
  for (std::size_t c = 0; c < table.channels.size(); ++c) {
    for (const auto& comp : table.channels[c]) {
      out << fmt::format("{},{},{}\n", c + 1, comp.freq_hz, comp.parameter);
    }
  }
}

void save_component_table(const std::filesystem::path& path, const MelComponentTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_component_table(out, table);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

MelComponentTable read_component_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigInvalid, "empty component table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "channel,freq_hz,parameter") {
    throw Error(ErrorCode::ConfigInvalid, "component table header must be channel,freq_hz,parameter");
  }
  MelComponentTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string ch, f, p;
    if (!std::getline(ss, ch, ',') || !std::getline(ss, f, ',') || !std::getline(ss, p)) {
      throw Error(ErrorCode::ConfigInvalid, fmt::format("component table line {} malformed", lineno));
    }
    std::size_t channel = 0;
    MelComponent comp;
    try {
      channel = std::stoul(ch);
      comp.freq_hz = std::stod(f);
      comp.parameter = std::stod(p);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, fmt::format("component table line {} malformed", lineno));
    }
    if (channel < 1) throw Error(ErrorCode::ConfigInvalid, "channels are numbered from 1");
    if (table.channels.size() < channel) table.channels.resize(channel);
    table.channels[channel - 1].push_back(comp);
  }
  table.validate();
  return table;
}

MelComponentTable load_component_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_component_table(in);
}

std::vector<MelComponent> sample_triangle(double left, double center, double right,
                                          double spacing_hz, double peak_parameter) {
  if (!(spacing_hz > 0.0)) throw Error(ErrorCode::ConfigInvalid, "component spacing must be positive");
  std::vector<MelComponent> comps;
  for (std::size_t k = 1;; ++k) {
    const double f = left + static_cast<double>(k) * spacing_hz;
    if (f >= right) break;
    const double w = triangle_response(f, left, center, right);
    if (w > 0.0) comps.push_back({f, peak_parameter * w});
  }
  return comps;
}

MelComponentTable derive_component_table(const MelFilterbankSpec& spec, double spacing_hz,
                                         double peak_parameter) {
  if (!(spacing_hz > 0.0)) throw Error(ErrorCode::ConfigInvalid, "component spacing must be positive");
  if (!(peak_parameter > 0.0)) throw Error(ErrorCode::ConfigInvalid, "peak parameter must be positive");
  const auto edges = mel_edge_frequencies(spec);
  MelComponentTable table;
  for (std::size_t m = 0; m < spec.num_filters; ++m) {
    auto comps = sample_triangle(edges[m], edges[m + 1], edges[m + 2], spacing_hz, peak_parameter);
    if (comps.empty()) {
      throw Error(ErrorCode::EmptySupport,
                  fmt::format("filter {} spans {:.3f}-{:.3f} Hz, narrower than the {} Hz grid",
                              m + 1, edges[m], edges[m + 2], spacing_hz));
    }
    table.channels.push_back(std::move(comps));
  }
  return table;
}

MelComponentTable overlay_component_table(const MelComponentTable& base,
                                          const MelComponentTable& override_table) {
  MelComponentTable out = base;
  if (out.channels.size() < override_table.channels.size()) {
    out.channels.resize(override_table.channels.size());
  }
  for (std::size_t c = 0; c < override_table.channels.size(); ++c) {
    if (!override_table.channels[c].empty()) out.channels[c] = override_table.channels[c];
  }
  return out;
}

std::string_view to_string(KernelTaper taper) noexcept {
  return taper == KernelTaper::Hann ? "hann" : "none";
}

KernelTaper kernel_taper_from_string(std::string_view name) {
  if (name == "hann") return KernelTaper::Hann;
  if (name == "none") return KernelTaper::None;
  throw Error(ErrorCode::ConfigInvalid, "unknown taper '" + std::string(name) + "'");
}

void TmfwcConfig::validate() const {
  if (num_channels < 1) throw Error(ErrorCode::ConfigInvalid, "need at least one channel");
  if (!(kernel_ms > 0.0)) throw Error(ErrorCode::ConfigInvalid, "kernel_ms must be positive");
  if (!(pool_window_ms > 0.0)) throw Error(ErrorCode::ConfigInvalid, "pool_window_ms must be positive");
  if (!(component_spacing_hz > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "component_spacing_hz must be positive");
  }
  filterbank.validate();
}

MelWaveKernel synthesize_mel_wave(std::span<const MelComponent> components, int sample_rate_hz,
                                  const TmfwcConfig& cfg, std::size_t channel_index) {
  if (components.empty()) throw Error(ErrorCode::ConfigInvalid, "channel has no components");
  if (sample_rate_hz <= 0) throw Error(ErrorCode::ConfigInvalid, "sample rate must be positive");
  if (!(cfg.kernel_ms > 0.0)) throw Error(ErrorCode::ConfigInvalid, "kernel_ms must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  for (const auto& c : components) {
    if (c.freq_hz >= nyquist) {
      throw Error(ErrorCode::AliasedComponent,
                  fmt::format("{} Hz component at {} Hz sampling", c.freq_hz, sample_rate_hz));
    }
  }
  const std::size_t len = std::max<std::size_t>(1, samples_for_ms(cfg.kernel_ms, sample_rate_hz));

  MelWaveKernel k;
  k.channel_index = channel_index;
  k.sample_rate_hz = sample_rate_hz;
  k.real_kernel.assign(len, 0.0);
  k.imag_kernel.assign(len, 0.0);
  for (const auto& c : components) {
    const double omega = 2.0 * std::numbers::pi * c.freq_hz / sample_rate_hz;
    for (std::size_t n = 0; n < len; ++n) {
      const double phase = omega * static_cast<double>(n);
      k.real_kernel[n] += c.parameter * std::cos(phase);
      k.imag_kernel[n] += c.parameter * std::sin(phase);
    }
  }
  if (cfg.taper == KernelTaper::Hann && len >= 2) {
    const auto w = window_coefficients(WindowKind::Hanning, len);
    for (std::size_t n = 0; n < len; ++n) {
      k.real_kernel[n] *= w[n];
      k.imag_kernel[n] *= w[n];
    }
  }
  return k;
}

ChannelResponse convolve_channel(const AudioBuffer& buf, const MelWaveKernel& kernel) {
  if (buf.sample_rate_hz() != kernel.sample_rate_hz) {
    throw Error(ErrorCode::SampleRateMismatch,
                fmt::format("audio at {} Hz, kernel at {} Hz", buf.sample_rate_hz(),
                            kernel.sample_rate_hz));
  }
  if (kernel.imag_kernel.size() != kernel.real_kernel.size() || kernel.real_kernel.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel parts differ in length");
  }
  const auto x = buf.samples();
  const std::size_t N = x.size();
  const std::size_t L = kernel.kernel_len();
  const std::size_t center = (L - 1) / 2;

  // out[i] = sum_m rev[m] * padded[i + m], with padded[q] = x[q - (L - 1 - center)].
  std::vector<double> padded(N + L - 1, 0.0);
  std::copy(x.begin(), x.end(), padded.begin() + static_cast<std::ptrdiff_t>(L - 1 - center));
  std::vector<double> rev_re(kernel.real_kernel.rbegin(), kernel.real_kernel.rend());
  std::vector<double> rev_im(kernel.imag_kernel.rbegin(), kernel.imag_kernel.rend());

  ChannelResponse out;
  out.real.assign(N, 0.0);
  out.imag.assign(N, 0.0);
  auto& counters = thread_op_counters();
  for (std::size_t i = 0; i < N; ++i) {
    const double* window = padded.data() + i;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t m = 0; m < L; ++m) {
      re += rev_re[m] * window[m];
      im += rev_im[m] * window[m];
    }
    out.real[i] = re;
    out.imag[i] = im;
    counters.macs += 2 * L;
  }
  return out;
}

std::vector<double> magnitude_envelope(std::span<const double> real, std::span<const double> imag) {
  if (real.size() != imag.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("real has {} samples, imag has {}", real.size(), imag.size()));
  }
  std::vector<double> env(real.size());
  for (std::size_t n = 0; n < real.size(); ++n) env[n] = std::hypot(real[n], imag[n]);
  return env;
}

std::vector<double> abs_max_pool(std::span<const double> values, std::size_t window) {
  if (window < 1) throw Error(ErrorCode::ConfigInvalid, "pool window must be >= 1");
  std::vector<double> out;
  out.reserve((values.size() + window - 1) / window);
  for (std::size_t start = 0; start < values.size(); start += window) {
    const std::size_t stop = std::min(values.size(), start + window);
    double best = values[start];
    for (std::size_t i = start + 1; i < stop; ++i) {
      if (std::abs(values[i]) > std::abs(best)) best = values[i];
    }
    out.push_back(best);
  }
  return out;
}

void normalize_max(FeatureMatrix& m) {
  double peak = 0.0;
  for (double v : m.data()) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) return;
  for (double& v : m.data()) v /= peak;
}

TmfwcExtractor::TmfwcExtractor(const TmfwcConfig& cfg, const MelComponentTable& table) : cfg_(cfg) {
  cfg_.validate();
  table.validate();
  if (table.num_channels() != cfg_.num_channels) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("component table has {} channels, config expects {}",
                            table.num_channels(), cfg_.num_channels));
  }
  const int fs = cfg_.filterbank.sample_rate_hz;
  for (std::size_t c = 0; c < table.num_channels(); ++c) {
    kernels_.push_back(synthesize_mel_wave(table.channels[c], fs, cfg_, c));
  }
  pool_window_ = std::max<std::size_t>(1, samples_for_ms(cfg_.pool_window_ms, fs));
}

FeatureMatrix TmfwcExtractor::extract_unnormalized(const AudioBuffer& buf) const {
  const std::size_t rows = (buf.size() + pool_window_ - 1) / pool_window_;
  FeatureMatrix out(rows, kernels_.size());
  for (std::size_t c = 0; c < kernels_.size(); ++c) {
    const auto resp = convolve_channel(buf, kernels_[c]);
    const auto pooled = abs_max_pool(magnitude_envelope(resp.real, resp.imag), pool_window_);
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = pooled[r];
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < kernels_.size(); ++c) names.push_back(fmt::format("m{}", c + 1));
  out.set_column_names(std::move(names));
  return out;
}

FeatureMatrix TmfwcExtractor::extract(const AudioBuffer& buf) const {
  auto out = extract_unnormalized(buf);
  normalize_max(out);
  return out;
}

FeatureMatrix tmfwc_extract(const AudioBuffer& buf, const TmfwcConfig& cfg,
                            const MelComponentTable& table) {
  return TmfwcExtractor(cfg, table).extract(buf);
}

}  // namespace tmfwc
