#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "smtad/preprocess.hpp"
#include "smtad/rng.hpp"

namespace smtad::testsupport {

// Clustered normal data with correlated features plus scattered anomalies,
// already rank-normalized and split. Deterministic per seed.
inline NormalizedDataset clustered_dataset(std::size_t n_normal, int sites, std::uint64_t seed,
                                           std::size_t n_anomalous = 0, double train_fraction = 0.8) {
    std::mt19937_64 rng(splitmix64(seed ^ 0xabcdef1234567890ULL));
    RawDataset raw;
    raw.cols = static_cast<std::size_t>(sites);
    auto gauss = [&rng] {
        // Box-Muller from our deterministic uniforms
        const double u1 = std::max(uniform_unit(rng), 1e-12);
        const double u2 = uniform_unit(rng);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    for (std::size_t i = 0; i < n_normal; ++i) {
        const double shared = gauss();
        const int cluster = uniform_unit(rng) < 0.5 ? -2 : 2;
        for (int l = 0; l < sites; ++l)
            raw.values.push_back(cluster + 0.8 * shared + 0.4 * gauss() + 0.15 * l);
        raw.labels.push_back(0);
    }
    for (std::size_t i = 0; i < n_anomalous; ++i) {
        for (int l = 0; l < sites; ++l) raw.values.push_back(uniform_real(rng, -6.0, 6.0));
        raw.labels.push_back(1);
    }
    raw.rows = n_normal + n_anomalous;

    const auto normalizer = fit_rank_normalizer(raw);
    auto data = apply_normalizer(raw, normalizer);
    return split(std::move(data), train_fraction, seed);
}

}  // namespace smtad::testsupport
