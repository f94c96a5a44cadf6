#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tmfwc/audio.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/feature_matrix.hpp"
#include "tmfwc/framing.hpp"

using namespace tmfwc;

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

void put_tag(std::vector<std::uint8_t>& b, const char* tag) { b.insert(b.end(), tag, tag + 4); }

// Hand-assembled RIFF image, independent of encode_wav.
std::vector<std::uint8_t> wav_image(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::uint8_t>& payload,
                                    bool extra_chunk = false) {
  std::vector<std::uint8_t> b;
  put_tag(b, "RIFF");
  put_u32(b, 0);
  put_tag(b, "WAVE");
  if (extra_chunk) {
    put_tag(b, "LIST");
    put_u32(b, 3);
    b.insert(b.end(), {'a', 'b', 'c', 0});  // odd size plus pad byte
  }
  put_tag(b, "fmt ");
  put_u32(b, 16);
  put_u16(b, format);
  put_u16(b, channels);
  put_u32(b, rate);
  put_u32(b, rate * channels * bits / 8);
  put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(b, bits);
  put_tag(b, "data");
  put_u32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  const auto riff = static_cast<std::uint32_t>(b.size() - 8);
  std::memcpy(b.data() + 4, &riff, 4);
  return b;
}

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> out;
  for (auto s : v) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::vector<std::uint8_t> f32(const std::vector<float>& v) {
  std::vector<std::uint8_t> out(v.size() * 4);
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_SUITE("signal-io") {
  TEST_CASE("pcm16 samples scale by 2^-15") {
    const auto buf = parse_wav(wav_image(1, 1, 8000, 16, pcm16({0, 16384, -16384})));
    REQUIRE(buf.size() == 3);
    CHECK(buf.samples()[0] == 0.0);
    CHECK(buf.samples()[1] == 0.5);
    CHECK(buf.samples()[2] == -0.5);
    CHECK(buf.sample_rate_hz() == 8000);
  }

  TEST_CASE("stereo averages to mono") {
    const auto buf = parse_wav(wav_image(3, 2, 8000, 32, f32({0.4f, 0.8f, 0.4f, 0.8f})));
    REQUIRE(buf.size() == 2);
    CHECK(buf.samples()[0] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(buf.samples()[1] == doctest::Approx(0.6).epsilon(1e-7));
  }

  TEST_CASE("length and rate are preserved") {
    std::vector<std::int16_t> s(8000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int16_t>(i % 200 - 100);
    const auto buf = parse_wav(wav_image(1, 1, 8000, 16, pcm16(s), true));
    CHECK(buf.size() == 8000);
    CHECK(buf.sample_rate_hz() == 8000);
    CHECK(buf.duration_s() == doctest::Approx(1.0));
  }

  TEST_CASE("float samples are clamped into [-1, 1]") {
    const auto buf = parse_wav(wav_image(3, 1, 16000, 32, f32({1.5f, -2.0f, 0.25f})));
    CHECK(buf.samples()[0] == 1.0);
    CHECK(buf.samples()[1] == -1.0);
    CHECK(buf.samples()[2] == 0.25);
  }

  TEST_CASE("container errors") {
    std::vector<std::uint8_t> junk{'R', 'I', 'F', 'X', 0, 0, 0, 0, 'W', 'A', 'V', 'E'};
    CHECK(code_of([&] { parse_wav(junk); }) == ErrorCode::MalformedContainer);
    CHECK(code_of([&] { parse_wav(std::vector<std::uint8_t>(5, 0)); }) == ErrorCode::MalformedContainer);
    // mu-law
    CHECK(code_of([&] { parse_wav(wav_image(7, 1, 8000, 8, {1, 2, 3})); }) ==
          ErrorCode::UnsupportedEncoding);
    // 24-bit PCM
    CHECK(code_of([&] { parse_wav(wav_image(1, 1, 8000, 24, {1, 2, 3})); }) ==
          ErrorCode::UnsupportedEncoding);
    CHECK(code_of([&] { parse_wav(wav_image(1, 1, 8000, 16, {})); }) == ErrorCode::EmptyAudio);
    CHECK(code_of([&] { load_wav("/nonexistent/file.wav"); }) == ErrorCode::IoFailure);
    CHECK(code_of([&] { AudioBuffer({}, 8000); }) == ErrorCode::EmptyAudio);
  }

  TEST_CASE("encode and parse round trip") {
    const auto x = testutil::random_signal(1000, 3, 0.9);
    const auto f = parse_wav(encode_wav(x, 1, 8000, WavEncoding::Float32));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.samples()[i] == static_cast<float>(x[i]));
    const auto p = parse_wav(encode_wav(x, 1, 8000, WavEncoding::Pcm16));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(p.samples()[i] - x[i]) <= 0.5 / 32768.0 + 1e-15);

    testutil::TempDir dir;
    save_wav(dir / "a.wav", AudioBuffer(x, 11025));
    const auto back = load_wav(dir / "a.wav");
    CHECK(back.sample_rate_hz() == 11025);
    CHECK(back.size() == x.size());
  }

  TEST_CASE("frame and hop lengths at 8 kHz") {
    const AudioBuffer buf(std::vector<double>(800, 0.1), 8000);
    const auto fs = frame_signal(buf, 20.0, 10.0);
    CHECK(fs.frame_len == 160);
    CHECK(fs.hop_len == 80);
  }

  TEST_CASE("exact frame length gives one unpadded frame") {
    std::vector<double> x(160);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.001 * static_cast<double>(i + 1);
    const auto fs = frame_samples(x, 160, 80);
    REQUIRE(fs.frames.size() == 1);
    CHECK(fs.frames[0] == x);
  }

  TEST_CASE("400 samples, frame 160, hop 80") {
    std::vector<double> x(400, 1.0);
    const auto fs = frame_samples(x, 160, 80);
    REQUIRE(fs.frames.size() == 4);
    // offsets 0, 80, 160, 240: the last frame ends at 400 exactly
    for (const auto& f : fs.frames) {
      CHECK(f.size() == 160);
      for (double v : f) CHECK(v == 1.0);
    }
  }

  TEST_CASE("short signals are zero padded into one frame") {
    const auto fs = frame_samples(std::vector<double>{1.0, 2.0, 3.0}, 8, 4);
    REQUIRE(fs.frames.size() == 1);
    CHECK(fs.frames[0] == std::vector<double>{1, 2, 3, 0, 0, 0, 0, 0});
  }

  TEST_CASE("framing errors") {
    const AudioBuffer buf(std::vector<double>(100, 0.0), 8000);
    CHECK(code_of([&] { frame_signal(buf, 10.0, 20.0); }) == ErrorCode::InvalidFraming);
    CHECK(code_of([&] { frame_signal(buf, 0.0, 0.0); }) == ErrorCode::InvalidFraming);
    CHECK(code_of([&] { frame_signal(buf, 20.0, -1.0); }) == ErrorCode::InvalidFraming);
    CHECK(code_of([&] { frame_count(10, 0, 1); }) == ErrorCode::InvalidFraming);
  }

  TEST_CASE("frame count matches brute-force enumeration") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t frame = 1 + gen() % 64;
      const std::size_t hop = 1 + gen() % frame;
      const std::size_t len = 1 + gen() % 600;
      // Start offsets s = 0, hop, ... while the previous frame had not already covered the signal.
      std::size_t count = 0;
      for (std::size_t s = 0;; s += hop) {
        ++count;
        if (s + frame >= len) break;
      }
      CHECK(frame_count(len, frame, hop) == count);
      std::vector<double> x(len, 1.0);
      CHECK(frame_samples(x, frame, hop).frames.size() == count);
    }
  }

  TEST_CASE("unwindowed frames at hop = frame reconstruct the signal") {
    const auto x = testutil::random_signal(1003, 5);
    const auto fs = frame_samples(x, 64, 64);
    std::vector<double> joined;
    for (const auto& f : fs.frames) joined.insert(joined.end(), f.begin(), f.end());
    REQUIRE(joined.size() >= x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(joined[i] == x[i]);
    for (std::size_t i = x.size(); i < joined.size(); ++i) CHECK(joined[i] == 0.0);
  }

  TEST_CASE("window coefficients") {
    CHECK(window_coefficient(WindowKind::Hamming, 0, 160) == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(window_coefficient(WindowKind::Hanning, 0, 160) == doctest::Approx(0.0));
    CHECK(window_coefficient(WindowKind::Hanning, 80, 161) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(window_coefficient(WindowKind::Hamming, 80, 161) == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t L : {2u, 3u, 16u, 161u, 400u}) {
      for (auto kind : {WindowKind::Hamming, WindowKind::Hanning}) {
        const auto w = window_coefficients(kind, L);
        for (std::size_t n = 0; n < L; ++n) CHECK(w[n] == doctest::Approx(w[L - 1 - n]).epsilon(1e-14));
      }
    }
    CHECK(code_of([] { window_coefficients(WindowKind::Hamming, 1); }) == ErrorCode::InvalidFraming);
  }

  TEST_CASE("rectangular window leaves frames unchanged") {
    const auto x = testutil::random_signal(500, 8);
    const auto fs = frame_samples(x, 100, 50);
    const auto w = apply_window(fs, WindowKind::Rectangular);
    CHECK(w.frames == fs.frames);

    const auto h = apply_window(fs, WindowKind::Hamming);
    CHECK(h.window_kind == WindowKind::Hamming);
    const auto coeffs = window_coefficients(WindowKind::Hamming, 100);
    for (std::size_t f = 0; f < fs.frames.size(); ++f) {
      for (std::size_t n = 0; n < 100; ++n) CHECK(h.frames[f][n] == fs.frames[f][n] * coeffs[n]);
    }
  }

  TEST_CASE("feature matrix csv and binary round trip") {
    FeatureMatrix m(3, 2, std::vector<double>{0.1, -2.5e-300, 1.0 / 3.0, 4.0, 1e10, -0.0});
    m.set_column_names({"a", "b"});
    std::stringstream ss;
    write_csv(ss, m);
    const auto back = read_csv(ss);
    CHECK(back == m);

    const auto bytes = encode_binary(m);
    CHECK(bytes.size() == 16 + 6 * 8);
    CHECK(std::memcmp(bytes.data(), kFeatureMatrixMagic, 8) == 0);
    CHECK(bytes[8] == 3);
    CHECK(bytes[12] == 2);
    const auto bin = decode_binary(bytes);
    CHECK(bin.rows() == 3);
    CHECK(bin.cols() == 2);
    for (std::size_t i = 0; i < 6; ++i) CHECK(bin.data()[i] == m.data()[i]);

    testutil::TempDir dir;
    save_csv(dir / "m.csv", m);
    CHECK(load_csv(dir / "m.csv") == m);
    save_binary(dir / "m.fm", m);
    CHECK(load_binary(dir / "m.fm").rows() == 3);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_binary(bad), Error);
    CHECK_THROWS_AS(m.set_column_names({"only"}), Error);
  }
}
