#pragma once

#include <cstdint>
#include <random>

namespace qdsim {

// SplitMix64 finalizer; used to derive well-separated stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent seeded stream for Monte-Carlo batch `stream` of a run seeded
// with `seed`. Streams are merge-order independent by construction.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(mix64(seed ^ mix64(stream)));
}

}  // namespace qdsim
