#include "smtad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smtad/csv.hpp"
#include "smtad/rng.hpp"
#include "smtad/threads.hpp"

namespace smtad {

PipelineResult run_experiment(const RawDataset& raw_in, const ExperimentConfig& config,
                              std::uint64_t run_seed, int n_threads) {
    const RawDataset raw =
        config.selection.empty() ? raw_in : csv::select_columns(raw_in, config.selection);
    raw.validate();

    // Tag rows first so the strict mode can fit on the training rows only;
    // in the default mode the fit is order-independent anyway.
    NormalizedDataset dataset;
    dataset.rows = raw.rows;
    dataset.cols = raw.cols;
    dataset.values = raw.values;
    dataset.labels = raw.labels;
    dataset.feature_names = raw.feature_names;
    dataset = split(std::move(dataset), config.split_fraction, run_seed);

    RankNormalizer normalizer;
    if (config.strict_normalizer) {
        RawDataset train_only;
        train_only.cols = raw.cols;
        for (std::size_t r = 0; r < raw.rows; ++r) {
            if (dataset.tags[r] != SplitTag::Train) continue;
            train_only.values.insert(train_only.values.end(),
                                     raw.values.begin() + static_cast<std::ptrdiff_t>(r * raw.cols),
                                     raw.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * raw.cols));
            train_only.labels.push_back(0);
            ++train_only.rows;
        }
        normalizer = fit_rank_normalizer(train_only);
    } else {
        normalizer = fit_rank_normalizer(raw);
    }
    dataset.values = transform(normalizer, raw.values, raw.rows, raw.cols);

    TrainConfig train_config = config.train;
    train_config.seed = run_seed;
    PipelineResult result;
    result.training = train(dataset, config.mixtures, config.resolutions, train_config, n_threads);
    if (result.training.diverged)
        throw numerical_error("run_experiment: training diverged: " + result.training.diagnostic);

    result.model.params = result.training.params;
    result.model.normalizer = normalizer;
    result.model.config = train_config;
    result.model.config.batch_size = result.training.batch_size;
    result.model.config.epochs = result.training.epochs;
    result.model.seed = run_seed;
    result.model.selection = config.selection;
    result.model.feature_names = raw.feature_names;

    // rank test rows by anomaly score
    ScoredTestSet test;
    std::vector<std::size_t> test_rows;
    for (std::size_t r = 0; r < dataset.rows; ++r)
        if (dataset.tags[r] != SplitTag::Train) test_rows.push_back(r);
    test.anomaly_scores.resize(test_rows.size());
    test.labels.resize(test_rows.size());
    parallel_for(test_rows.size(), n_threads, [&](std::size_t i) {
        const std::size_t r = test_rows[i];
        test.anomaly_scores[i] = to_anomaly_score(normality_score(result.model.params, dataset.row(r)));
        test.labels[i] = dataset.labels[r];
    });

    result.eval.auroc = auroc(test);
    result.eval.auprc = auprc(test);
    for (int y : test.labels) result.eval.n_pos += y;
    result.eval.n_neg = test.labels.size() - result.eval.n_pos;
    result.eval.seed = run_seed;
    result.dataset = std::move(dataset);
    return result;
}

std::vector<ScoreBreakdown> score_matrix(const ModelFile& model, std::span<const double> values,
                                         std::size_t rows, std::size_t cols, int n_threads) {
    std::vector<double> selected;
    std::span<const double> input = values;
    const std::size_t model_cols = static_cast<std::size_t>(model.params.sites);
    if (cols != model_cols) {
        if (model.selection.empty())
            throw std::domain_error("score_matrix: feature count does not match the model");
        int max_site = 0;
        for (int s : model.selection) max_site = std::max(max_site, s);
        if (cols < static_cast<std::size_t>(max_site))
            throw std::domain_error(
                "score_matrix: feature count matches neither the model nor its selection list");
        selected.reserve(rows * model.selection.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (int s : model.selection) selected.push_back(values[r * cols + (s - 1)]);
        input = selected;
    }

    const std::vector<double> normalized = transform(model.normalizer, input, rows, model_cols);
    std::vector<ScoreBreakdown> out(rows);
    parallel_for(rows, n_threads, [&](std::size_t r) {
        out[r] = normality_score(model.params,
                                 std::span<const double>(normalized).subspan(r * model_cols, model_cols));
    });
    return out;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd ms;
    if (values.empty()) return ms;
    for (double v : values) ms.mean += v;
    ms.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
        ms.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return ms;
}

}  // namespace smtad
