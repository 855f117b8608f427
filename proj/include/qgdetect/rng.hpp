#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic random helpers. std::mt19937_64 has a fixed output sequence
// by the standard, but the std distributions do not, so every mapping from
// raw 64-bit draws to values is spelled out here. Identical seeds must give
// identical artifacts across compilers.

namespace qgd::rng {

using engine = std::mt19937_64;

// Uniform double in [0, 1), 53 significand bits.
inline double uniform01(engine& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Uniform integer in [0, n). Modulo bias is below 2^-53 for any n that fits
// in memory, far under reproducibility-relevant noise.
inline std::uint64_t below(engine& g, std::uint64_t n) {
    return g() % n;
}

// Standard normal via Box-Muller; draws two uniforms per call, no cached
// spare so the call sequence stays position-independent.
inline double normal(engine& g) {
    double u1 = uniform01(g);
    double u2 = uniform01(g);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Fisher-Yates.
template <class T>
void shuffle(std::vector<T>& v, engine& g) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(below(g, i + 1));
        std::swap(v[i], v[j]);
    }
}

// Derives an independent stream from a base seed and a stream tag
// (splitmix64 finalizer). Used to decouple weight init, subsampling and
// epoch shuffles from each other.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace qgd::rng
