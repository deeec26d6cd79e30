#pragma once

#include <cstdint>
#include <random>

namespace portfolio {

// Derives decorrelated 64-bit values from a seed; used to give every
// instance / component its own reproducible RNG stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a)) ^ splitmix64(b + 0x51ed27f4a1cbe287ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(mix_seed(seed, a, b));
}

} // namespace portfolio
