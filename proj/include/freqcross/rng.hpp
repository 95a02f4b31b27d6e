#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace freqcross {

// Deterministic random stream (xoshiro256** seeded through splitmix64).
// We do not use <random> engines for anything that must reproduce bit-exactly:
// distribution implementations are not pinned by the standard, this one is.
//
// Streams for independent work items are derived from (seed, ids...) with
// Rng::derive, so results never depend on scheduling or call order.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Derived stream for a work item identified by up to three indices.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t x = seed;
    x = splitmix64(x) ^ (a + 0x9e3779b97f4a7c15ULL);
    x = splitmix64(x) ^ (b + 0xbf58476d1ce4e5b9ULL);
    x = splitmix64(x) ^ (c + 0x94d049bb133111ebULL);
    return Rng(splitmix64(x));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the pair's second value is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // avoid log(0)
    while (u1 <= 0.0) u1 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n). n must be > 0. Rejection-free multiply-shift
  // would do; the tiny modulo bias of this form is irrelevant at our n,
  // but we keep Lemire's trick anyway since it is two lines.
  uint64_t next_below(uint64_t n) {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    return static_cast<uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace freqcross
