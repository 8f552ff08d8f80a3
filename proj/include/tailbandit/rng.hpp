#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tailbandit {

// SplitMix64 finalizer step; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Counter-based per-episode seed. For a fixed master seed, distinct
// (cell, replicate) pairs map to distinct seeds as long as cell < 2^24 and
// replicate < 2^40, so results do not depend on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                 std::uint64_t replicate) {
    return mix64(mix64(master) + ((cell << 40) | replicate));
}

// Deterministic random stream. The engine is mt19937_64, whose output
// sequence is fixed by the standard; every distribution transform is done
// here rather than with <random> distributions, which are not portable
// across standard libraries. This keeps seeded runs bit-identical.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes exactly two words.
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    // +1.0 or -1.0 with equal probability; one word.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Uniform integer in [0, n), n >= 1. Modulo bias is irrelevant here
    // (n is tiny: permutation indices), determinism is what matters.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::mt19937_64 engine_;
};

}  // namespace tailbandit
