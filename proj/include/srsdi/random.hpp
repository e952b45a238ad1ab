// random.hpp
//
// Seed derivation and the handful of draws the simulator needs. Every random
// quantity is taken from an engine seeded by derive_seed(base, tags...), so a
// result depends only on its seed path and never on scheduling.

#pragma once

#include "srsdi/core.hpp"

#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>

namespace srsdi {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ splitmix64(tag)); }
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) { return mix_seed(seed, fnv1a64(tag)); }

inline std::uint64_t derive_seed(std::uint64_t seed) { return seed; }
template <class T, class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, const T& tag, const Rest&... rest) {
    if constexpr (std::is_convertible_v<T, std::string_view>)
        return derive_seed(mix_seed(seed, std::string_view(tag)), rest...);
    else
        return derive_seed(mix_seed(seed, static_cast<std::uint64_t>(tag)), rest...);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline double std_normal(Rng& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(rng);
}

inline double uniform01(Rng& rng) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(rng);
}

// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
inline cplx complex_normal(Rng& rng, double variance = 1.0) {
    const double s = std::sqrt(variance / 2.0);
    const double re = std_normal(rng);
    const double im = std_normal(rng);
    return {s * re, s * im};
}

// Laplace(0, b): variance 2 b^2.
inline double laplace(Rng& rng, double b) {
    const double u = uniform01(rng) - 0.5;
    const double sgn = u < 0 ? -1.0 : 1.0;
    return -b * sgn * std::log1p(-2.0 * std::abs(u));
}

// Grid with i.i.d. real and imaginary parts ~ N(0, component_variance).
inline ComplexGrid gaussian_grid(const Shape& s, Rng& rng, double component_variance = 1.0) {
    ComplexGrid g(s);
    const double sd = std::sqrt(component_variance);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double re = std_normal(rng);
        const double im = std_normal(rng);
        g[i] = {sd * re, sd * im};
    }
    return g;
}

// Partial Fisher-Yates: the first k entries of the result are a uniform
// sample without replacement from `items`.
template <class T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k, Rng& rng) {
    if (k > items.size()) throw ParameterError("sample_without_replacement: k exceeds population");
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, items.size() - 1);
        std::swap(items[i], items[d(rng)]);
    }
    items.resize(k);
    return items;
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return sample_without_replacement(std::move(idx), n, rng);
}

}  // namespace srsdi
