#ifndef SAMP_RNG_HPP
#define SAMP_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "samp/special.hpp"

// Counter-based deterministic randomness (Philox4x32-10).  Every variate is
// addressed by (key, stream, index), so generation order and thread count
// cannot change the result: entry (i, j) of a matrix is always the same bits
// no matter who computes it first.

namespace samp {

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) {
  // splitmix64-style mixing of an integer into a running hash
  v += 0x9e3779b97f4a7c15ull + h;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
  return v ^ (v >> 31);
}

namespace detail {

struct Philox4x32 {
  static constexpr uint32_t kM0 = 0xD2511F53u;
  static constexpr uint32_t kM1 = 0xCD9E8D57u;
  static constexpr uint32_t kW0 = 0x9E3779B9u;
  static constexpr uint32_t kW1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(uint64_t key, uint64_t ctr_hi,
                                       uint64_t ctr_lo) {
    uint32_t c0 = static_cast<uint32_t>(ctr_lo);
    uint32_t c1 = static_cast<uint32_t>(ctr_lo >> 32);
    uint32_t c2 = static_cast<uint32_t>(ctr_hi);
    uint32_t c3 = static_cast<uint32_t>(ctr_hi >> 32);
    uint32_t k0 = static_cast<uint32_t>(key);
    uint32_t k1 = static_cast<uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      uint64_t p0 = static_cast<uint64_t>(kM0) * c0;
      uint64_t p1 = static_cast<uint64_t>(kM1) * c2;
      uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      uint32_t lo0 = static_cast<uint32_t>(p0);
      uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      uint32_t lo1 = static_cast<uint32_t>(p1);
      uint32_t n0 = hi1 ^ c1 ^ k0;
      uint32_t n1 = lo1;
      uint32_t n2 = hi0 ^ c3 ^ k1;
      uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += kW0;
      k1 += kW1;
    }
    return {c0, c1, c2, c3};
  }
};

inline double u01(uint32_t hi, uint32_t lo) {
  // 53 random bits into (0, 1); never returns 0 or 1 exactly
  uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace detail

// A keyed stream of random variates with random access by index.
class CounterRng {
 public:
  CounterRng(uint64_t key, uint64_t stream) : key_(key), stream_(stream) {}

  // Convenience: key derived from a name plus integer tags (seed, batch, ...).
  static CounterRng keyed(std::string_view name, uint64_t seed,
                          uint64_t stream) {
    uint64_t k = fnv1a64(name);
    k = hash_combine(k, seed);
    return CounterRng(k, stream);
  }

  double uniform(uint64_t index) const {
    auto b = detail::Philox4x32::block(key_, stream_, index);
    return detail::u01(b[0], b[1]);
  }

  // Standard normal at an absolute position (Box-Muller, one per counter).
  double normal(uint64_t index) const {
    auto b = detail::Philox4x32::block(key_, stream_, index);
    double u1 = detail::u01(b[0], b[1]);
    double u2 = detail::u01(b[2], b[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t index, uint64_t n) const {
    auto b = detail::Philox4x32::block(key_, stream_, index);
    uint64_t bits = (static_cast<uint64_t>(b[0]) << 32) | b[1];
    return bits % n;
  }

  uint64_t key() const { return key_; }
  uint64_t stream() const { return stream_; }

 private:
  uint64_t key_;
  uint64_t stream_;
};

}  // namespace samp

#endif  // SAMP_RNG_HPP
