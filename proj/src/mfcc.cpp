#include "tmfwc/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/op_counters.hpp"
#include "tmfwc/spectrum.hpp"

namespace tmfwc {

void MfccConfig::validate(const MelFilterbankSpec& spec) const {
  if (num_ceps < 1 || num_ceps > spec.num_filters) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("num_ceps {} outside [1, {}]", num_ceps, spec.num_filters));
  }
  if (delta_width < 1) throw Error(ErrorCode::ConfigInvalid, "delta_width must be >= 1");
  if (!(floor_eps > 0.0)) throw Error(ErrorCode::ConfigInvalid, "floor_eps must be positive");
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0) || hop_ms > frame_ms) {
    throw Error(ErrorCode::InvalidFraming, "need frame_ms >= hop_ms > 0");
  }
}

std::vector<double> dct_cepstrum(std::span<const double> energies, std::size_t num_ceps,
                                 double floor_eps, bool include_c0, CepstrumPhase phase) {
  const std::size_t M = energies.size();
  if (M == 0) throw Error(ErrorCode::DimensionMismatch, "no mel energies");
  if (num_ceps > M) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("num_ceps {} exceeds {} filters", num_ceps, M));
  }
  std::vector<double> log_s(M);
  for (std::size_t m = 0; m < M; ++m) {
    if (energies[m] < 0.0) throw Error(ErrorCode::DimensionMismatch, "negative mel energy");
    log_s[m] = std::log10(std::max(energies[m], floor_eps));
  }
  const double offset = phase == CepstrumPhase::OneBasedFilters ? 0.5 : -0.5;
  const std::size_t first = include_c0 ? 0 : 1;
  std::vector<double> ceps(num_ceps);
  for (std::size_t i = 0; i < num_ceps; ++i) {
    const auto n = static_cast<double>(first + i);
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      acc += log_s[m] * std::cos(std::numbers::pi * n * (static_cast<double>(m) + offset) /
                                 static_cast<double>(M));
    }
    ceps[i] = acc;
  }
  thread_op_counters().macs += num_ceps * M;
  return ceps;
}

std::vector<std::vector<double>> delta(const std::vector<std::vector<double>>& trajectory,
                                       std::size_t width) {
  if (trajectory.empty()) throw Error(ErrorCode::EmptyTrajectory, "no frames");
  if (width < 1) throw Error(ErrorCode::ConfigInvalid, "delta width must be >= 1");
  const std::size_t T = trajectory.size();
  const std::size_t D = trajectory.front().size();
  for (const auto& row : trajectory) {
    if (row.size() != D) throw Error(ErrorCode::DimensionMismatch, "ragged trajectory");
  }
  double denom = 0.0;
  for (std::size_t n = 1; n <= width; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;

  const auto at = [&](std::ptrdiff_t t) -> const std::vector<double>& {
    const auto clamped = std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(T) - 1);
    return trajectory[static_cast<std::size_t>(clamped)];
  };

  std::vector<std::vector<double>> out(T, std::vector<double>(D, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    for (std::size_t n = 1; n <= width; ++n) {
      const auto ni = static_cast<std::ptrdiff_t>(n);
      const auto& ahead = at(ti + ni);
      const auto& behind = at(ti - ni);
      for (std::size_t d = 0; d < D; ++d) {
        out[t][d] += static_cast<double>(n) * (ahead[d] - behind[d]);
      }
    }
    for (double& v : out[t]) v /= denom;
  }
  return out;
}

FeatureMatrix mfcc_pipeline(const AudioBuffer& buf, const MelFilterbankSpec& spec,
                            const MfccConfig& cfg) {
  return mfcc_pipeline(buf, spec, build_mel_filterbank(spec), cfg);
}

FeatureMatrix mfcc_pipeline(const AudioBuffer& buf, const MelFilterbankSpec& spec,
                            const MelFilterbank& fb, const MfccConfig& cfg) {
  if (buf.sample_rate_hz() != spec.sample_rate_hz) {
    throw Error(ErrorCode::SampleRateMismatch,
                fmt::format("audio at {} Hz, filterbank at {} Hz", buf.sample_rate_hz(),
                            spec.sample_rate_hz));
  }
  cfg.validate(spec);
  if (fb.num_bins() != spec.num_bins()) {
    throw Error(ErrorCode::DimensionMismatch, "filterbank does not match spec");
  }
  const auto frames = apply_window(frame_signal(buf, cfg.frame_ms, cfg.hop_ms), cfg.window);
  if (frames.frame_len > spec.fft_size) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("frame of {} samples exceeds fft_size {}", frames.frame_len,
                            spec.fft_size));
  }
  if (cfg.window != WindowKind::Rectangular) {
    thread_op_counters().macs += frames.frames.size() * frames.frame_len;
  }

  std::vector<std::vector<double>> statics;
  statics.reserve(frames.frames.size());
  for (const auto& frame : frames.frames) {
    const auto power = dft_power_spectrum(frame, spec.fft_size);
    const auto energies = apply_filterbank(power, fb);
    statics.push_back(dct_cepstrum(energies, cfg.num_ceps, cfg.floor_eps, cfg.include_c0, cfg.phase));
  }

  std::vector<std::vector<double>> blocks[3];
  blocks[0] = std::move(statics);
  std::size_t nblocks = 1;
  if (cfg.append_deltas) {
    blocks[1] = delta(blocks[0], cfg.delta_width);
    blocks[2] = delta(blocks[1], cfg.delta_width);
    nblocks = 3;
  }

  const std::size_t C = cfg.num_ceps;
  FeatureMatrix out(blocks[0].size(), C * nblocks);
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      for (std::size_t c = 0; c < C; ++c) out(t, b * C + c) = blocks[b][t][c];
    }
  }
  std::vector<std::string> names;
  const char* prefixes[3] = {"c", "d", "dd"};
  const std::size_t first = cfg.include_c0 ? 0 : 1;
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (std::size_t c = 0; c < C; ++c) names.push_back(fmt::format("{}{}", prefixes[b], first + c));
  }
  out.set_column_names(std::move(names));
  return out;
}

}  // namespace tmfwc
