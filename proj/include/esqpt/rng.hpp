#pragma once

#include <cstdint>

namespace esqpt {

// Counter-based uniform stream (splitmix64 mixer): the k-th draw is a pure
// function of (seed, k).  Monte-Carlo loops can therefore be chunked across
// threads while every sample index still produces the same value, which keeps
// results independent of the worker count.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const { return mix(counter + mix(seed)); }

    // Uniform in [0, 1).
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(std::uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * uniform(counter);
    }
};

}  // namespace esqpt
