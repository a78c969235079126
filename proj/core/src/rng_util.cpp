#include "rng_util.hpp"

#include <algorithm>
#include <numeric>

namespace copkit::detail {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    if (m > n) m = n;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded_rand(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace copkit::detail
