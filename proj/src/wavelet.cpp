#include "tmfwc/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/framing.hpp"
#include "tmfwc/op_counters.hpp"

namespace tmfwc {

std::string_view to_string(WaveletFamily family) noexcept {
  return family == WaveletFamily::Haar ? "haar" : "db4";
}

WaveletFamily wavelet_family_from_string(std::string_view name) {
  if (name == "haar") return WaveletFamily::Haar;
  if (name == "db4" || name == "daubechies4") return WaveletFamily::Daubechies4;
  throw Error(ErrorCode::ConfigInvalid, "unknown wavelet family '" + std::string(name) + "'");
}

std::vector<double> lowpass_filter(WaveletFamily family) {
  if (family == WaveletFamily::Haar) {
    const double a = 1.0 / std::sqrt(2.0);
    return {a, a};
  }
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  return {(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d};
}

std::vector<double> highpass_filter(WaveletFamily family) {
  const auto h = lowpass_filter(family);
  const std::size_t L = h.size();
  std::vector<double> g(L);
  for (std::size_t k = 0; k < L; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - k];
  return g;
}

WaveletLevel dwt_single_level(std::span<const double> x, WaveletFamily family) {
  const auto h = lowpass_filter(family);
  const auto g = highpass_filter(family);
  const std::size_t L = h.size();
  if (x.size() < L) {
    throw Error(ErrorCode::SignalTooShort,
                fmt::format("{} samples, {} filter needs at least {}", x.size(), to_string(family), L));
  }
  std::vector<double> ext(x.begin(), x.end());
  if (ext.size() % 2 == 1) ext.push_back(ext.back());
  const std::size_t n = ext.size();
  const std::size_t half = n / 2;

  WaveletLevel out;
  out.approx.assign(half, 0.0);
  out.detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      const double v = ext[(2 * k + j) % n];
      a += h[j] * v;
      d += g[j] * v;
    }
    out.approx[k] = a;
    out.detail[k] = d;
  }
  thread_op_counters().macs += 2 * L * half;
  return out;
}

std::size_t WaveletDecomposition::coefficient_count() const noexcept {
  std::size_t total = approximation.size();
  for (const auto& d : details) total += d.size();
  return total;
}

WaveletDecomposition dwt_multilevel(std::span<const double> x, const WaveletSpec& spec) {
  if (x.empty()) throw Error(ErrorCode::SignalTooShort, "empty signal");
  if (spec.levels < 1) throw Error(ErrorCode::ConfigInvalid, "need at least one level");
  const std::size_t max_levels = std::bit_width(x.size()) - 1;
  if (spec.levels > max_levels) {
    throw Error(ErrorCode::TooManyLevels,
                fmt::format("{} levels requested, {} samples allow {}", spec.levels, x.size(),
                            max_levels));
  }
  WaveletDecomposition out;
  out.input_length = x.size();
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t level = 0; level < spec.levels; ++level) {
    auto step = dwt_single_level(current, spec.family);
    out.details.push_back(std::move(step.detail));
    current = std::move(step.approx);
  }
  out.approximation = std::move(current);
  return out;
}

FeatureMatrix decomposition_matrix(const WaveletDecomposition& d) {
  std::size_t width = d.approximation.size();
  for (const auto& band : d.details) width = std::max(width, band.size());
  FeatureMatrix m(d.details.size() + 1, width);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c) names.push_back(fmt::format("k{}", c));
  for (std::size_t r = 0; r < d.details.size(); ++r) {
    std::copy(d.details[r].begin(), d.details[r].end(), m.row(r).begin());
  }
  std::copy(d.approximation.begin(), d.approximation.end(), m.row(d.details.size()).begin());
  m.set_column_names(std::move(names));
  return m;
}

namespace {

constexpr int kCascadeLevels = 14;

// psi sampled at t = n / 2^kCascadeLevels over [0, 3], built from exact
// scaling-function values at the integers by the refinement equation
// phi(t) = sqrt(2) sum_k h_k phi(2t - k).
const std::vector<double>& db4_psi_table() {
  static const std::vector<double> table = [] {
    const auto h = lowpass_filter(WaveletFamily::Daubechies4);
    const auto g = highpass_filter(WaveletFamily::Daubechies4);
    const double s3 = std::sqrt(3.0);
    const double r2 = std::sqrt(2.0);
    std::vector<double> phi = {0.0, (1.0 + s3) / 2.0, (1.0 - s3) / 2.0, 0.0};
    // phi on grid j holds 3 * 2^j + 1 samples.
    for (int j = 0; j < kCascadeLevels - 1; ++j) {
      const std::size_t step = std::size_t{1} << j;
      const std::size_t count = 3 * (step * 2) + 1;
      std::vector<double> next(count, 0.0);
      for (std::size_t n = 0; n < count; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
          if (n < k * step) break;
          const std::size_t idx = n - k * step;
          if (idx < phi.size()) acc += h[k] * phi[idx];
        }
        next[n] = r2 * acc;
      }
      phi = std::move(next);
    }
    const std::size_t step = std::size_t{1} << (kCascadeLevels - 1);
    const std::size_t count = 3 * (step * 2) + 1;
    std::vector<double> psi(count, 0.0);
    for (std::size_t n = 0; n < count; ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (n < k * step) break;
        const std::size_t idx = n - k * step;
        if (idx < phi.size()) acc += g[k] * phi[idx];
      }
      psi[n] = r2 * acc;
    }
    return psi;
  }();
  return table;
}

}  // namespace

double mother_wavelet_support(WaveletFamily family) noexcept {
  return family == WaveletFamily::Haar ? 1.0 : 3.0;
}

double mother_wavelet(WaveletFamily family, double t) {
  if (family == WaveletFamily::Haar) {
    if (t >= 0.0 && t < 0.5) return 1.0;
    if (t >= 0.5 && t < 1.0) return -1.0;
    return 0.0;
  }
  if (!(t > 0.0) || !(t < 3.0)) return 0.0;
  const auto& table = db4_psi_table();
  const double pos = t * static_cast<double>(std::size_t{1} << kCascadeLevels);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= table.size()) return table.back();
  const double frac = pos - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

double cwt_coefficient(const AudioBuffer& x, double scale, double shift_s, WaveletFamily family) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidScale, fmt::format("scale {}", scale));
  const double dt = 1.0 / x.sample_rate_hz();
  const auto samples = x.samples();
  const double support = mother_wavelet_support(family) * scale;
  // Only samples with (t - b) / a inside the support contribute.
  const double t_lo = std::max(0.0, shift_s);
  const double t_hi = shift_s + support;
  if (t_hi < 0.0) return 0.0;
  const auto n_lo = static_cast<std::size_t>(std::floor(t_lo / dt));
  const auto n_hi = std::min(samples.size(), static_cast<std::size_t>(std::ceil(t_hi / dt)) + 1);
  double acc = 0.0;
  for (std::size_t n = n_lo; n < n_hi; ++n) {
    const double t = static_cast<double>(n) * dt;
    acc += samples[n] * mother_wavelet(family, (t - shift_s) / scale);
  }
  return acc * dt / std::sqrt(scale);
}

FeatureMatrix dwt_features(const AudioBuffer& buf, const DwtFeatureConfig& cfg) {
  const auto frames = frame_signal(buf, cfg.frame_ms, cfg.hop_ms);
  const std::size_t bands = cfg.wavelet.levels + 1;
  FeatureMatrix out(frames.frames.size(), bands);
  for (std::size_t r = 0; r < frames.frames.size(); ++r) {
    const auto dec = dwt_multilevel(frames.frames[r], cfg.wavelet);
    const auto energy = [&](const std::vector<double>& band) {
      double e = 0.0;
      for (double v : band) e += v * v;
      return std::log10(std::max(e, cfg.floor_eps));
    };
    for (std::size_t b = 0; b < dec.details.size(); ++b) out(r, b) = energy(dec.details[b]);
    out(r, bands - 1) = energy(dec.approximation);
  }
  std::vector<std::string> names;
  for (std::size_t b = 0; b + 1 < bands; ++b) names.push_back(fmt::format("d{}", b + 1));
  names.push_back(fmt::format("a{}", cfg.wavelet.levels));
  out.set_column_names(std::move(names));
  return out;
}

}  // namespace tmfwc
