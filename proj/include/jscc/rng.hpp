#ifndef JSCC_RNG_HPP_
#define JSCC_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace jscc {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t seed, uint64_t v) { return splitmix64(seed ^ splitmix64(v)); }

inline uint64_t hash_bytes64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ULL) {
  // FNV-1a over the bytes, folded into the seed.
  uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A named, seedable random stream. Gaussian draws always happen in double so
/// float and double pipelines consume identical underlying variates.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }

  uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derives an independent substream from a master seed, a stream name, and up
/// to three indices. Substreams with distinct (name, indices) are decorrelated
/// no matter which worker consumes them, which keeps parallel evaluation
/// results independent of the worker count.
inline RngStream derive_stream(uint64_t seed, std::string_view name, uint64_t a = 0,
                               uint64_t b = 0, uint64_t c = 0) {
  uint64_t h = hash_bytes64(name, splitmix64(seed));
  h = mix64(h, a);
  h = mix64(h, b);
  h = mix64(h, c);
  return RngStream(h);
}

}  // namespace jscc

#endif  // JSCC_RNG_HPP_
