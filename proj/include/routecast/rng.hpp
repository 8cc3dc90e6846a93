#pragma once

// Deterministic random streams.
//
// All randomness in the engine comes from xoshiro256** seeded through
// SplitMix64. A stream is identified by (seed, stream index); the same pair
// yields the same sequence on every platform, which is what lets resample
// loops run in any order or in parallel without changing results.

#include <cstdint>
#include <string_view>

namespace routecast {

class SplitMix64 {
public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

// SplitMix64 finaliser applied to a single value.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  return SplitMix64(x).next();
}

class Xoshiro256ss {
public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256ss(std::uint64_t seed) noexcept {
    SplitMix64 sm(seed);
    for (auto &w : s_)
      w = sm.next();
  }

  // Independent stream `stream` of generator `seed`.
  static constexpr Xoshiro256ss for_stream(std::uint64_t seed,
                                           std::uint64_t stream) noexcept {
    return Xoshiro256ss(mix64(seed) ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
  }

  // Raw state, for checking against published reference sequences.
  static constexpr Xoshiro256ss from_state(std::uint64_t s0, std::uint64_t s1,
                                           std::uint64_t s2,
                                           std::uint64_t s3) noexcept {
    Xoshiro256ss g(0);
    g.s_[0] = s0;
    g.s_[1] = s1;
    g.s_[2] = s2;
    g.s_[3] = s3;
    return g;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound) by Lemire's multiply-and-reject.
  // bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4]{};
};

// 64-bit FNV-1a, used to turn a label into a sub-seed.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Sub-seed for a named consumer of a parent seed (one per metric, stratum,
// bucket...).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::string_view label) noexcept {
  return mix64(seed ^ mix64(fnv1a64(label)));
}

} // namespace routecast
