#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smtad/metrics.hpp"
#include "smtad/model_io.hpp"
#include "smtad/preprocess.hpp"
#include "smtad/training.hpp"

namespace smtad {

// One experiment cell: ingest -> normalize -> split -> train -> score ->
// rank metrics. Shared by the CLI commands and the reproduction suites.
struct ExperimentConfig {
    std::string label_col = "label";
    std::vector<std::string> normal_labels = {"0"};
    double split_fraction = 0.5;
    int mixtures = 4;
    int resolutions = 2;
    TrainConfig train;
    std::vector<int> selection;  // 1-based original site indices; empty = all
    bool strict_normalizer = false;  // fit the rank CDFs on the training rows only
};

struct EvalOutcome {
    double auroc = 0.0;
    double auprc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::uint64_t seed = 0;
};

struct PipelineResult {
    ModelFile model;
    TrainResult training;
    EvalOutcome eval;
    NormalizedDataset dataset;  // tagged rows used for train/test
};

// Runs the full pipeline under `run_seed` (split, init and shuffle streams
// all derive from it). Throws numerical_error if training diverges.
PipelineResult run_experiment(const RawDataset& raw, const ExperimentConfig& config,
                              std::uint64_t run_seed, int n_threads = 1);

// Scores a raw-value matrix through a saved model (rank transform plus
// normality score per row). Accepts either the model's post-selection width
// or the original width, applying the stored selection in the latter case.
std::vector<ScoreBreakdown> score_matrix(const ModelFile& model, std::span<const double> values,
                                         std::size_t rows, std::size_t cols, int n_threads = 1);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);  // sample std (n - 1)

}  // namespace smtad
