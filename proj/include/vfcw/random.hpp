#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <type_traits>

namespace vfcw {

/// Random engine used throughout. mt19937_64 has a standard-mandated output
/// sequence, so seeded runs reproduce across standard libraries.
using Rng = std::mt19937_64;

/// Uniform variate on the open interval (0, 1) built from the top 53 bits.
template <class Engine>
double uniform_open01(Engine& rng) {
    static_assert(std::is_same_v<typename Engine::result_type, std::uint64_t>,
                  "uniform_open01 expects a 64-bit engine");
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform variate on [lo, hi).
template <class Engine>
double uniform(Engine& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

template <class Engine>
double exponential1(Engine& rng) {
    return -std::log(uniform_open01(rng));
}

/// splitmix64 finaliser; used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a, stable across platforms (unlike std::hash).
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) noexcept {
    return mix64(parent ^ mix64(salt));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view salt) noexcept {
    return derive_seed(parent, fnv1a(salt));
}

} // namespace vfcw
