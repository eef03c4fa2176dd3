#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace smtad {

// Stream ids for deriving independent per-stage seeds from one master seed.
// Keeping the derivation counter-based means each stage (split, init,
// shuffle, subsample) is reproducible on its own.
enum class SeedStream : std::uint64_t {
    Split = 1,
    Init = 2,
    Shuffle = 3,
    Subsample = 4,
    Realization = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::uint64_t counter = 0) {
    std::uint64_t h = splitmix64(master ^ (0x51ed2701a9b4d22dULL * static_cast<std::uint64_t>(stream)));
    return splitmix64(h + counter);
}

// std::mt19937_64's output sequence is pinned by the standard, but the
// <random> distributions are not. These helpers keep every draw
// bit-reproducible across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void fisher_yates_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace smtad
