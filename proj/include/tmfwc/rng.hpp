#pragma once

#include <cstdint>
#include <random>

namespace tmfwc {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Named stream ids. A stream's engine is mt19937_64 seeded with
// splitmix64(seed ^ splitmix64(stream)); mt19937_64 output is fixed by the
// C++ standard, so draws reproduce across platforms and implementations.
enum class RngStream : std::uint64_t {
  RecurrentWeights = 1,
  InputWeights = 2,
  DataSplit = 3,
  LabelShuffle = 4,
  InitialState = 5,
};

class Rng {
 public:
  Rng(std::uint64_t seed, RngStream stream);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tmfwc
