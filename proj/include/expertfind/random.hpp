#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace expertfind {

/// FNV-1a 64-bit. Stable across platforms, used for substream labels and
/// file digests.
constexpr std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the substream named by `labels` under `root`. Distinct label
/// sequences give independent streams; the result does not depend on call order.
template <typename... Labels>
std::uint64_t derive_seed(std::uint64_t root, const Labels&... labels)
{
    std::uint64_t h = splitmix64(root);
    ((h = splitmix64(h ^ fnv1a(std::string_view(labels)))), ...);
    return h;
}

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). Standard distributions are implementation
/// defined, so draws are done by hand to keep outputs identical everywhere.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound)
{
    if (bound <= 1) {
        return 0;
    }
    const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

/// Uniform real in [0, 1) with 53 bits of precision.
inline double uniform_real(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p)
{
    return uniform_real(rng) < p;
}

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, Rng& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = uniform_below(rng, i);
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace expertfind
