#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

// Deterministic randomness helpers. Mock backends and shot selection must
// produce identical results across platforms and standard libraries, so we
// avoid std::shuffle and the std <random> distributions (their outputs are
// implementation-defined) and use an explicit splitmix64 generator instead.
namespace ragwin {

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  uint64_t state = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  return splitmix64_next(state);
}

class SmallRng {
 public:
  explicit SmallRng(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64_next(state_); }

  // Uniform in [0, n); n must be > 0. Modulo bias is irrelevant at the
  // scales used here; determinism is what matters.
  uint64_t below(uint64_t n) { return next() % n; }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SmallRng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ragwin
