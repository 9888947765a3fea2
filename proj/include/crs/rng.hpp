#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crs {

using Rng = std::mt19937_64;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives a child seed from a master seed and a path of tags
// (stage -> shot -> model/trial). Every random draw in the project
// flows from one master seed through this function, so results are
// independent of scheduling and worker count.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(base ^ 0x5851f42d4c957f2dull);
    for (std::uint64_t tag : path)
        s = mix64(s ^ mix64(tag + 0x2545f4914f6cdd1dull));
    return s;
}

} // namespace crs
