#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace congestion {

// Splittable counter-free PRNG built on splitmix64 (stream derivation) and
// xoshiro256** (draws). The generator is part of the trace contract: identical
// (seed, tags) always yield the identical draw sequence on one build.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Derives an independent stream keyed by up to three tags. Derivation is
  // order-sensitive: substream(a,b) != substream(b,a).
  Rng substream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t sm = state_[0] ^ (state_[2] << 1);
    sm = splitmix64(sm) ^ (a * 0x9e3779b97f4a7c15ULL);
    sm = splitmix64(sm) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    sm = splitmix64(sm) ^ (c * 0x165667b19e3779f9ULL);
    Rng out(0);
    for (auto& word : out.state_) word = splitmix64(sm);
    return out;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one value per call, cached pair dropped
  // to keep the draw count per call fixed).
  double normal();

  // Index into a probability vector; assumes entries >= 0 summing to ~1.
  int categorical(std::span<const double> probs);

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4] = {};
};

}  // namespace congestion
