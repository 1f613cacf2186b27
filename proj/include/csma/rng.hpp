#pragma once
// xoshiro256** with splitmix64 seeding.  Each simulated node gets its own
// stream derived from (master seed, node id), so trajectories are
// reproducible and runs with different horizons share a common prefix.

#include <cstdint>

namespace csma {

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Xoshiro256ss {
 public:
  Xoshiro256ss() : Xoshiro256ss(1) {}

  explicit Xoshiro256ss(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  static Xoshiro256ss for_stream(uint64_t master_seed, uint64_t stream_id) {
    uint64_t sm = master_seed;
    (void)splitmix64_next(sm);
    sm ^= splitmix64_next(sm) + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
    return Xoshiro256ss(sm);
  }

  uint64_t next() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, 1) with 53 random bits
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  // unbiased-enough integer in [0, n) for small n (Lemire multiply-shift)
  uint32_t below(uint32_t n) {
    return static_cast<uint32_t>(
        (static_cast<uint64_t>(static_cast<uint32_t>(next() >> 32)) * n) >> 32);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace csma
