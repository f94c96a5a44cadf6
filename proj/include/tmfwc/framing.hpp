#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "tmfwc/audio.hpp"

namespace tmfwc {

enum class WindowKind { Rectangular, Hamming, Hanning };

std::string_view to_string(WindowKind kind) noexcept;
WindowKind window_kind_from_string(std::string_view name);

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  std::size_t frame_len = 0;
  std::size_t hop_len = 0;
  WindowKind window_kind = WindowKind::Rectangular;
};

// Samples per duration at the given rate, rounded to nearest.
std::size_t samples_for_ms(double ms, int sample_rate_hz) noexcept;

// ceil((len - frame_len) / hop_len) + 1 for len >= frame_len, else 1.
std::size_t frame_count(std::size_t len, std::size_t frame_len, std::size_t hop_len);

// Frame i starts at i * hop_len; the final partial frame is zero-padded.
FrameSequence frame_signal(const AudioBuffer& buf, double frame_ms, double hop_ms);
FrameSequence frame_samples(std::span<const double> samples, std::size_t frame_len,
                            std::size_t hop_len);

// Hamming: 0.54 - 0.46 cos(2 pi n / (L - 1)); Hanning: 0.5 (1 - cos(2 pi n / (L - 1))).
double window_coefficient(WindowKind kind, std::size_t n, std::size_t length);
std::vector<double> window_coefficients(WindowKind kind, std::size_t length);

FrameSequence apply_window(const FrameSequence& fs, WindowKind kind);

}  // namespace tmfwc
