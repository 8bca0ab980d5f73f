#ifndef CGS_RNG_HPP
#define CGS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace cgs {

// Seeded generator with a fixed uniform mapping. std::mt19937_64 output is
// pinned by the standard and the (0,1) mapping below avoids the
// implementation-defined std::uniform_real_distribution, so identical seeds
// give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in the open interval (0,1): 53 random bits centered in each cell.
    double uniform01() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; one value per call, no cached spare so
    // the stream position stays easy to reason about.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Modulo bias is irrelevant at the sizes used here (n << 2^64).
        return engine_() % n;
    }

    // Derive an independent stream for the given purpose tag.
    static std::uint64_t sub_seed(std::uint64_t master, std::uint64_t tag) {
        // splitmix64 finalizer over master^tag.
        std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (tag + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cgs

#endif  // CGS_RNG_HPP
