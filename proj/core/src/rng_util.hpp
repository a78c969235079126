#pragma once

// Internal RNG helpers. Distributions are hand-rolled on top of mt19937_64 so
// generated streams do not depend on the standard library implementation.

#include <cstdint>
#include <random>
#include <vector>

namespace copkit::detail {

// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi); degenerate bounds return lo.
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

// Unbiased integer in [0, bound) via rejection.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound <= 1) {
        rng();  // keep stream consumption independent of the bound
        return 0;
    }
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    return draw % bound;
}

// m distinct indices out of [0, n), uniformly without replacement, returned
// ascending (partial Fisher-Yates, then sorted to preserve original order).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace copkit::detail
