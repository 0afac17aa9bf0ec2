#pragma once

// Counter-based random stream.
//
// Draw number k (1-based) of a stream seeded with `seed` is mix(seed, k),
// where mix is the splitmix64 finaliser applied to seed + k * golden:
//
//   z  = seed + k * 0x9E3779B97F4A7C15
//   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z ^= (z >> 31)
//
// A uniform in [0, 1) is built from the top 53 bits: (z >> 11) * 2^-53.
// Nothing here depends on shared generator state, so every draw is
// reproducible from (seed, k) alone in any language.

#include <cstdint>

namespace cascade {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + counter * kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Top 53 bits of `bits` mapped onto [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t drawn = 0)
      : seed_(seed), counter_(drawn) {}

  std::uint64_t next_bits() { return mix(seed_, ++counter_); }
  double next_unit() { return to_unit(next_bits()); }

  std::uint64_t seed() const { return seed_; }
  /// Number of draws consumed so far.
  std::uint64_t drawn() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace cascade
