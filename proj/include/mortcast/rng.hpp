#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace mortcast {

// splitmix64 finalizer. Good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream derived from a master seed and two stream indices.
// Identical (seed, hi, lo) always yields an identical engine state, so work
// can be partitioned across any number of workers without changing results.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t hi, std::uint64_t lo) {
    std::uint64_t s = mix64(seed);
    s = mix64(s ^ (hi * 0xd1342543de82ef95ULL));
    s = mix64(s ^ (lo * 0xaf251af3b0f025b5ULL));
    return std::mt19937_64(s);
}

// Uniform draw in [0, 1) using the top 53 bits of the engine output.
// Avoids std::generate_canonical so the bit stream is implementation-independent.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// One pair of independent standard normals (Box-Muller).
// Consumes exactly two engine outputs.
inline std::pair<double, double> normal_pair(std::mt19937_64& gen) {
    const double u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    // 1 - u1 lies in (0, 1], so the log is finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

inline double normal01(std::mt19937_64& gen) {
    return normal_pair(gen).first;
}

} // namespace mortcast
