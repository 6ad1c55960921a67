#pragma once

#include <cstdint>
#include <random>

namespace shadowlab {

// splitmix64 finalizer; used to derive independent sub-seeds from a base
// seed plus stream indices (pass index, sample index, trial index, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

inline std::mt19937 make_rng(std::uint64_t seed) {
    return std::mt19937(static_cast<std::uint32_t>(splitmix64(seed)));
}

// Uniform double in [lo, hi]; tolerates lo == hi (degenerate range).
inline double uniform_in(std::mt19937& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace shadowlab
