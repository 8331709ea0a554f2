#pragma once

#include <cstdint>

namespace ktree::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic PRNG with behaviour pinned by this code, not by the standard
// library. All seeded randomness in the library flows through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return splitmix64(state_); }

    // Unbiased draw in [0, bound) via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0u - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Derives an independent stream from a base seed and a sequence number.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t sequence) {
    std::uint64_t s = seed ^ (0xA5A5A5A5DEADBEEFull + sequence * 0x9E3779B97F4A7C15ull);
    return splitmix64(s);
}

}  // namespace ktree::detail
