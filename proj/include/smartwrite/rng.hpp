#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace smartwrite {

// Deterministic randomness helpers. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard); the distributions are hand-rolled because
// std::uniform_*_distribution is implementation-defined and would break
// byte-identical reruns across toolchains.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stable fan-out: one master seed plus a stage/stream tag gives an independent
// seed. Changing the tag changes the stream; changing the master changes all.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
    uint64_t s = master ^ fnv1a64(tag);
    splitmix64(s);
    return splitmix64(s);
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index) {
    uint64_t s = derive_seed(master, tag) ^ (0x632be59bd9b4e019ull * (index + 1));
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Unbiased-enough bounded draw (128-bit multiply-shift). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next_u64()) * bound) >> 64);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    uint8_t next_byte() { return static_cast<uint8_t>(next_u64() >> 56); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Draws an index with probability proportional to probs[i]; probs must sum
    // to ~1. Falls back to the last index on accumulated rounding.
    size_t categorical(const std::vector<double>& probs) {
        double u = next_double();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace smartwrite
