#pragma once

#include <cstdint>

namespace pimbs {

/// splitmix64 step; also used to derive independent seed streams.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives a named sub-stream seed from a base seed. Used so that e.g. the
/// training-data stream and the weight-init stream of one run never overlap.
inline uint64_t derive_seed(uint64_t base, uint64_t tag) {
    uint64_t s = base ^ (0xD1B54A32D192ED03ULL * (tag + 1));
    return splitmix64(s);
}

/// xoshiro256++ (Blackman & Vigna). Chosen over std::mt19937_64 because the
/// standard distributions are not bit-portable across library
/// implementations; this generator plus the explicit uniform mapping below
/// reproduces datasets exactly on any platform.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        // expand the 64-bit seed into the 256-bit state
        for (auto& w : s_) w = splitmix64(seed);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n) by rejection (unbiased, portable).
    uint64_t next_below(uint64_t n) {
        const uint64_t threshold = -n % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace pimbs
