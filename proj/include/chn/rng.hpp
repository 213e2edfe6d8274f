#pragma once

#include <cmath>
#include <cstdint>

namespace chn {

// SplitMix64 output function (Steele, Lea, Flood 2014). Used both as a
// stand-alone mixer for deriving independent stream keys and as the
// recommended seeder for xoshiro state.
inline uint64_t splitmix64_mix(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// n-th output of the SplitMix64 sequence started at `seed`, computable in
// O(1). Disjoint n values give statistically independent keys, which is what
// makes the Monte Carlo estimators splittable across realizations and
// engines without any sequential seeding pass.
inline uint64_t splitmix64_at(uint64_t seed, uint64_t n) {
  return splitmix64_mix(seed + n * 0x9E3779B97F4A7C15ULL);
}

// xoshiro256++ (Blackman, Vigna 2019), seeded from SplitMix64 per the
// authors' recommendation. The algorithm is fully specified, so a fixed seed
// reproduces the same stream on every build.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t key) {
    for (int i = 0; i < 4; ++i) state_[i] = splitmix64_at(key, static_cast<uint64_t>(i));
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1): 53-bit mantissa shifted to cell
  // centers, so 0 and 1 are never returned and logs of the output are safe.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Unit-mean exponential.
  double exponential() { return -std::log(uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace chn
