#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tmfwc {

// Mono PCM signal with samples in [-1, 1].
class AudioBuffer {
 public:
  // Throws EmptyAudio for an empty sample vector and ConfigInvalid for a
  // non-positive rate. Samples outside [-1, 1] are clamped.
  AudioBuffer(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_hz_;
};

enum class WavEncoding { Pcm16, Float32 };

// Decodes a RIFF/WAVE image. Accepts PCM16 and IEEE float32 (including the
// WAVE_FORMAT_EXTENSIBLE wrapper), mono or multichannel; channels are
// averaged to mono. PCM16 is scaled by 2^-15.
AudioBuffer parse_wav(std::span<const std::uint8_t> bytes);
AudioBuffer load_wav(const std::filesystem::path& path);

// Interleaved frames, `channels` samples per frame.
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int channels,
                                     int sample_rate_hz, WavEncoding encoding);
void save_wav(const std::filesystem::path& path, const AudioBuffer& buf,
              WavEncoding encoding = WavEncoding::Pcm16);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace tmfwc
