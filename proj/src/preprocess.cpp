#include "smtad/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "smtad/rng.hpp"

namespace smtad {

void RawDataset::validate() const {
    if (rows < 2) throw std::domain_error("RawDataset: need at least two rows");
    if (cols < 1) throw std::domain_error("RawDataset: need at least one feature");
    if (values.size() != rows * cols) throw std::domain_error("RawDataset: value buffer size mismatch");
    if (labels.size() != rows) throw std::domain_error("RawDataset: label count mismatch");
    for (double v : values)
        if (!std::isfinite(v)) throw std::domain_error("RawDataset: non-finite value");
    for (int y : labels)
        if (y != 0 && y != 1) throw std::domain_error("RawDataset: labels must be 0 or 1");
    if (!feature_names.empty() && feature_names.size() != cols)
        throw std::domain_error("RawDataset: feature name count mismatch");
}

double FeatureCdf::transform_one(double v) const {
    if (!std::isfinite(v)) throw std::domain_error("transform: non-finite input value");
    const auto it = std::lower_bound(values.begin(), values.end(), v);
    if (it != values.end() && *it == v) return mapped[static_cast<std::size_t>(it - values.begin())];

    if (mode == FeatureMode::Discrete) {
        // unseen level: snap to the nearest reference level (lower one on ties)
        if (it == values.begin()) return mapped.front();
        if (it == values.end()) return mapped.back();
        const std::size_t hi = static_cast<std::size_t>(it - values.begin());
        const std::size_t lo = hi - 1;
        return (v - values[lo] <= values[hi] - v) ? mapped[lo] : mapped[hi];
    }

    const double floor_value = 1.0 / (2.0 * static_cast<double>(reference_size));
    if (it == values.begin()) return floor_value;
    if (it == values.end()) return 1.0;
    const std::size_t hi = static_cast<std::size_t>(it - values.begin());
    const std::size_t lo = hi - 1;
    const double t = (v - values[lo]) / (values[hi] - values[lo]);
    return mapped[lo] + t * (mapped[hi] - mapped[lo]);
}

RankNormalizer fit_rank_normalizer(const RawDataset& reference, int discrete_threshold) {
    reference.validate();
    RankNormalizer normalizer;
    normalizer.discrete_threshold = discrete_threshold;
    normalizer.features.resize(reference.cols);

    std::vector<double> column(reference.rows);
    for (std::size_t c = 0; c < reference.cols; ++c) {
        for (std::size_t r = 0; r < reference.rows; ++r) column[r] = reference.at(r, c);
        std::sort(column.begin(), column.end());

        FeatureCdf& cdf = normalizer.features[c];
        cdf.values.clear();
        cdf.mapped.clear();

        // group ties; a group spanning sorted positions [i, j) has average
        // 1-based rank (i + 1 + j) / 2
        std::size_t distinct = 0;
        for (std::size_t i = 0; i < column.size();) {
            std::size_t j = i + 1;
            while (j < column.size() && column[j] == column[i]) ++j;
            cdf.values.push_back(column[i]);
            cdf.mapped.push_back(0.5 * static_cast<double>(i + 1 + j));  // avg rank, rescaled below
            ++distinct;
            i = j;
        }

        const bool discrete = distinct == 1 || distinct <= static_cast<std::size_t>(std::max(discrete_threshold, 0));
        if (discrete) {
            cdf.mode = FeatureMode::Discrete;
            cdf.reference_size = distinct;  // D_l
            for (std::size_t r = 0; r < distinct; ++r)
                cdf.mapped[r] = static_cast<double>(r + 1) / static_cast<double>(distinct);
        } else {
            cdf.mode = FeatureMode::Continuous;
            cdf.reference_size = column.size();  // N
            for (double& m : cdf.mapped) m /= static_cast<double>(column.size());
        }
    }
    return normalizer;
}

std::vector<double> transform(const RankNormalizer& normalizer, std::span<const double> values,
                              std::size_t rows, std::size_t cols) {
    if (cols != normalizer.feature_count())
        throw std::domain_error("transform: column count does not match the fitted normalizer");
    if (values.size() != rows * cols) throw std::domain_error("transform: value buffer size mismatch");
    std::vector<double> out(values.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out[r * cols + c] = normalizer.features[c].transform_one(values[r * cols + c]);
    return out;
}

std::size_t NormalizedDataset::count_tag(SplitTag tag) const {
    std::size_t n = 0;
    for (SplitTag t : tags)
        if (t == tag) ++n;
    return n;
}

std::vector<double> NormalizedDataset::rows_with_tag(SplitTag tag) const {
    std::vector<double> out;
    for (std::size_t r = 0; r < rows; ++r)
        if (tags[r] == tag) out.insert(out.end(), values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                       values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
    return out;
}

NormalizedDataset apply_normalizer(const RawDataset& data, const RankNormalizer& normalizer) {
    NormalizedDataset out;
    out.rows = data.rows;
    out.cols = data.cols;
    out.values = transform(normalizer, data.values, data.rows, data.cols);
    out.labels = data.labels;
    out.feature_names = data.feature_names;
    return out;
}

NormalizedDataset split(NormalizedDataset data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::domain_error("split: train fraction must be in (0, 1)");

    std::vector<std::size_t> normal_rows;
    for (std::size_t r = 0; r < data.rows; ++r)
        if (data.labels[r] == 0) normal_rows.push_back(r);
    if (normal_rows.empty()) throw std::runtime_error("split: no normal rows to train on");

    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(normal_rows.size())));
    if (n_train == 0) throw std::runtime_error("split: training fraction selects zero rows");

    std::mt19937_64 rng(derive_seed(seed, SeedStream::Split));
    fisher_yates_shuffle(normal_rows, rng);

    data.tags.assign(data.rows, SplitTag::TestAnomalous);
    for (std::size_t r = 0; r < data.rows; ++r)
        if (data.labels[r] == 0) data.tags[r] = SplitTag::TestNormal;
    for (std::size_t i = 0; i < n_train; ++i) data.tags[normal_rows[i]] = SplitTag::Train;
    return data;
}

}  // namespace smtad
