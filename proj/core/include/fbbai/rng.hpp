#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fbbai {

// Deterministic PRNG building blocks. Everything here is fixed-width integer
// arithmetic, so streams replay identically across platforms and runs.

// splitmix64 finalizer; good avalanche, used for seeding and substream keys.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Key for the independent substream of one (trial, arm) pair under a master
// seed. Trial-level parallelism cannot reorder draws within a substream.
inline std::uint64_t substream_key(std::uint64_t seed, std::uint64_t trial,
                                   std::uint64_t arm) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
  h = mix64(h ^ (0xbf58476d1ce4e5b9ULL * (arm + 1)));
  return h;
}

// xoshiro256** by Blackman and Vigna.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    // Expand through splitmix64; the all-zero state is unreachable.
    std::uint64_t sm = seed;
    for (auto& w : s_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
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

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform01_open_low() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (two uniforms per draw, cosine branch).
  double gaussian() {
    const double u1 = uniform01_open_low();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny next to 2^64 in all our
    // uses, so the bias is far below statistical resolution.
    return next() % n;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_;
};

}  // namespace fbbai
