#ifndef CLAB_RNG_HPP
#define CLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace clab {

// SplitMix64 finalizer; the workhorse for counter-based streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x165667b19e3779f9ULL + (b << 6) + (b >> 2) + mix64(b)));
}

// Stateless uniform in [0,1) keyed by an arbitrary tuple of ids. Used where
// draws must not depend on iteration order (e.g. per-(scale, site) fields).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c = 0) {
  std::uint64_t h = hash_combine(hash_combine(hash_combine(seed, a), b), c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Small deterministic PRNG stream (xoshiro256**), split off a master seed by
// stream id. Streams with distinct ids are independent for practical purposes.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t z = hash_combine(seed, stream);
    for (auto& si : s_) si = z = mix64(z);
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

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0,1] variant, safe to feed logarithms.
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double normal() {
    // Box-Muller; one value per call keeps streams reproducible.
    double u = uniform_pos(), v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x, r;
    do {
      x = next();
      r = x % n;
    } while (x - r > std::uint64_t(-1) - n + 1);
    return r;
  }

  std::uint64_t binomial(std::uint64_t n, double p);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace clab

#endif
