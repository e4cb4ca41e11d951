#pragma once

#include <cstdint>

namespace rsm {

// SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden gamma
// 0x9E3779B97F4A7C15 and each output is the state passed through the
// variant-13 finalizer (shifts 30/27/31, multipliers 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB). Being counter-based, substream t of seed s starts at
// mix(s ^ mix(t * gamma)), so trials can be generated in any order.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return mix(seed ^ mix((index + 1) * kGamma));
  }

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  // Top 53 bits as a double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace rsm
