#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dkappa::rng {

// SplitMix64 step; also used to whiten (seed, stream) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable sub-seed for a named stream. Streams derived from the same master
// seed are independent of evaluation order, which is what makes parallel and
// sequential runs agree bit for bit.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + stream * 0xff51afd7ed558ccdULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(seed, stream));
}

// Uniform in [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = g();
        if (r >= threshold) return r % n;
    }
}

// k distinct indices in [0, n), uniformly, via partial Fisher-Yates.
// `pool` is scratch; its previous contents are discarded.
inline void sample_indices(std::mt19937_64& g, std::size_t n, std::size_t k,
                           std::vector<std::uint32_t>& pool,
                           std::vector<std::uint32_t>& out) {
    pool.resize(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
    out.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded(g, n - i));
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
}

}  // namespace dkappa::rng
