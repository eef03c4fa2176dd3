#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace smtad {

// Ingested tabular data: row-major N x L values plus 0/1 labels
// (1 = anomalous).
struct RawDataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> feature_names;  // empty or length cols

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    void validate() const;  // finite values, N >= 2, labels 0/1
};

enum class FeatureMode { Continuous, Discrete };

// One feature's empirical CDF: sorted distinct reference values with their
// normalized targets (average rank / N for continuous, level rank / D for
// discrete).
struct FeatureCdf {
    FeatureMode mode = FeatureMode::Continuous;
    std::vector<double> values;
    std::vector<double> mapped;
    std::size_t reference_size = 0;  // N for continuous, D for discrete

    double transform_one(double v) const;
};

struct RankNormalizer {
    std::vector<FeatureCdf> features;
    int discrete_threshold = 12;

    std::size_t feature_count() const { return features.size(); }
};

// Features with <= discrete_threshold distinct values are treated as
// discrete levels; constant features become discrete with D = 1 (everything
// maps to 1).
RankNormalizer fit_rank_normalizer(const RawDataset& reference, int discrete_threshold = 12);

// Maps values through the fitted per-feature CDFs into [0, 1]. In-reference
// values get their (average) rank; out-of-reference continuous values
// interpolate between bracketing reference values and clamp to
// [1/(2N), 1] outside the range; unseen discrete levels snap to the nearest
// level. Throws on non-finite input or column-count mismatch.
std::vector<double> transform(const RankNormalizer& normalizer, std::span<const double> values,
                              std::size_t rows, std::size_t cols);

enum class SplitTag : std::uint8_t { Train, TestNormal, TestAnomalous };

struct NormalizedDataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // in [0, 1]
    std::vector<int> labels;
    std::vector<SplitTag> tags;  // empty until split() assigns them
    std::vector<std::string> feature_names;

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols, cols};
    }
    std::size_t count_tag(SplitTag tag) const;
    // Packed row-major copy of all rows carrying `tag`.
    std::vector<double> rows_with_tag(SplitTag tag) const;
};

NormalizedDataset apply_normalizer(const RawDataset& data, const RankNormalizer& normalizer);

// Tags floor(train_fraction * #normal) normal rows as Train uniformly at
// random under the split stream of `seed`; remaining normals become
// TestNormal and every anomalous row TestAnomalous. Deterministic; existing
// tags are discarded, so re-splitting with the same seed is a no-op.
NormalizedDataset split(NormalizedDataset data, double train_fraction, std::uint64_t seed);

}  // namespace smtad
