#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace psb {

// splitmix64 finalizer; also the fixed mixing function for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent child seed from a base seed and a salt.
/// Per-iteration seeds in the self-training loop use salt = iteration index.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(splitmix64(base) ^ splitmix64(salt));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

/// Uniform sample of k indices out of [0, n), without replacement, in
/// ascending order (Knuth selection sampling).
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           std::mt19937_64& rng) {
    std::vector<std::size_t> picked;
    picked.reserve(k);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t needed = k;
    for (std::size_t i = 0; i < n && needed > 0; ++i) {
        const std::size_t remaining = n - i;
        if (unit(rng) * static_cast<double>(remaining) < static_cast<double>(needed)) {
            picked.push_back(i);
            --needed;
        }
    }
    return picked;
}

}  // namespace psb
