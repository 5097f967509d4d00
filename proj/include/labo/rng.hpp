// Seeded randomness with bit-stable output: every draw is derived from
// mt19937_64 raw bits through our own transforms, so results do not depend
// on the standard library's distribution implementations.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace labo::rng {

using Engine = std::mt19937_64;

/// splitmix64 output function; used to derive independent sub-seeds from
/// a (seed, index) pair without correlated low bits.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(mix(seed, 0)); }
inline Engine make_engine(std::uint64_t seed, std::uint64_t index) { return Engine(mix(seed, index)); }

/// Uniform draw in [0, 1) with 53-bit resolution.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform draw in [lo, hi).
inline double uniform(Engine& eng, double lo, double hi) {
    return lo + uniform01(eng) * (hi - lo);
}

/// Standard normal draw via Box-Muller (cosine branch, two uniforms per draw).
inline double normal01(Engine& eng) {
    const double u1 = 1.0 - uniform01(eng);  // (0, 1]
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// In-place Fisher-Yates shuffle driven by raw engine bits.
template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(eng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

/// Radical-inverse (van der Corput) value of `index` in the given base.
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double scale = inv;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return value;
}

/// d-dimensional Halton point (prime bases), index >= 1.
inline std::vector<double> halton(std::uint64_t index, std::size_t dims) {
    static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<double> p(dims);
    for (std::size_t d = 0; d < dims; ++d) p[d] = radical_inverse(index, kPrimes[d % 12]);
    return p;
}

}  // namespace labo::rng
