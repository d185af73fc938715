#pragma once
// Small deterministic PRNG used everywhere randomness is needed.
// splitmix64 gives identical streams on every platform, unlike the
// standard library distributions.

#include <cstdint>

namespace coref {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). n must be > 0.
  uint64_t next_below(uint64_t n) { return next() % n; }

  // Uniform in [lo, hi].
  int next_int(int lo, int hi) {
    return lo + int(next_below(uint64_t(hi - lo + 1)));
  }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

 private:
  uint64_t state_;
};

// Stable 64-bit FNV-1a hash; used to derive independent seed streams
// from string identity.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const char* s, uint64_t h = 0xcbf29ce484222325ULL) {
  size_t n = 0;
  while (s[n] != '\0') ++n;
  return fnv1a64(s, n, h);
}

}  // namespace coref
