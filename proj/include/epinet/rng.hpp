#pragma once

#include <cstdint>
#include <random>

namespace epinet {

using rng_t = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the stream for run `index` of an experiment seeded with `seed`.
/// Streams for different indices are decorrelated by two splitmix rounds.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline rng_t make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return rng_t(seq);
}

inline rng_t make_stream(std::uint64_t seed, std::uint64_t index) {
    return make_rng(stream_seed(seed, index));
}

}  // namespace epinet
