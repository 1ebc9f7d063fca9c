#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace stot {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded generator with cheap derived streams. Streams derived from the same
// (seed, path) are identical across runs, which is what makes experiment
// cells reproducible in isolation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  // Derived stream for a (cell, rep)-style coordinate.
  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    return Rng(h);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform index in [0, n).
  std::size_t next_index(std::size_t n) {
    // Rejection-free modulo bias is negligible for the sizes used here,
    // but stay exact anyway.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  // Index into a cumulative-mass table (strictly increasing, back() ~ 1).
  std::size_t next_from_cumulative(std::span<const double> cumulative) {
    const double u = next_double() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative[mid] > u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

 private:
  static std::mt19937_64 mix_seed(std::uint64_t seed) {
    std::uint64_t s = seed;
    return std::mt19937_64(splitmix64(s));
  }

  std::mt19937_64 engine_;
};

}  // namespace stot
