#include "tmfwc/framing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tmfwc/error.hpp"

namespace tmfwc {

std::string_view to_string(WindowKind kind) noexcept {
  switch (kind) {
    case WindowKind::Rectangular: return "rectangular";
    case WindowKind::Hamming: return "hamming";
    case WindowKind::Hanning: return "hanning";
  }
  return "rectangular";
}

WindowKind window_kind_from_string(std::string_view name) {
  if (name == "rectangular") return WindowKind::Rectangular;
  if (name == "hamming") return WindowKind::Hamming;
  if (name == "hanning" || name == "hann") return WindowKind::Hanning;
  throw Error(ErrorCode::ConfigInvalid, "unknown window '" + std::string(name) + "'");
}

std::size_t samples_for_ms(double ms, int sample_rate_hz) noexcept {
  const double n = std::round(ms * sample_rate_hz / 1000.0);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

std::size_t frame_count(std::size_t len, std::size_t frame_len, std::size_t hop_len) {
  if (frame_len == 0 || hop_len == 0 || hop_len > frame_len) {
    throw Error(ErrorCode::InvalidFraming, "need 0 < hop_len <= frame_len");
  }
  if (len <= frame_len) return 1;
  return (len - frame_len + hop_len - 1) / hop_len + 1;
}

FrameSequence frame_samples(std::span<const double> samples, std::size_t frame_len,
                            std::size_t hop_len) {
  const std::size_t count = frame_count(samples.size(), frame_len, hop_len);
  FrameSequence fs;
  fs.frame_len = frame_len;
  fs.hop_len = hop_len;
  fs.frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> frame(frame_len, 0.0);
    const std::size_t start = i * hop_len;
    const std::size_t stop = std::min(samples.size(), start + frame_len);
    if (start < stop) std::copy(samples.begin() + start, samples.begin() + stop, frame.begin());
    fs.frames.push_back(std::move(frame));
  }
  return fs;
}

FrameSequence frame_signal(const AudioBuffer& buf, double frame_ms, double hop_ms) {
  if (!(frame_ms > 0.0) || !(hop_ms > 0.0) || hop_ms > frame_ms) {
    throw Error(ErrorCode::InvalidFraming, "need frame_ms >= hop_ms > 0");
  }
  const std::size_t frame_len = samples_for_ms(frame_ms, buf.sample_rate_hz());
  const std::size_t hop_len = samples_for_ms(hop_ms, buf.sample_rate_hz());
  if (frame_len < 1 || hop_len < 1) {
    throw Error(ErrorCode::InvalidFraming, "frame or hop shorter than one sample");
  }
  return frame_samples(buf.samples(), frame_len, std::min(hop_len, frame_len));
}

double window_coefficient(WindowKind kind, std::size_t n, std::size_t length) {
  if (kind == WindowKind::Rectangular) return 1.0;
  if (length < 2) throw Error(ErrorCode::InvalidFraming, "tapered window needs length >= 2");
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(n) /
                       static_cast<double>(length - 1);
  if (kind == WindowKind::Hamming) return 0.54 - 0.46 * std::cos(phase);
  return 0.5 * (1.0 - std::cos(phase));
}

std::vector<double> window_coefficients(WindowKind kind, std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) w[n] = window_coefficient(kind, n, length);
  return w;
}

FrameSequence apply_window(const FrameSequence& fs, WindowKind kind) {
  FrameSequence out = fs;
  out.window_kind = kind;
  if (kind == WindowKind::Rectangular) return out;
  const auto w = window_coefficients(kind, fs.frame_len);
  for (auto& frame : out.frames) {
    for (std::size_t n = 0; n < frame.size(); ++n) frame[n] *= w[n];
  }
  return out;
}

}  // namespace tmfwc
