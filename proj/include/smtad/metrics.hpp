#pragma once

#include <span>
#include <vector>

#include "smtad/model.hpp"

namespace smtad {

// Ranked test set: higher anomaly score = more anomalous, label 1 = anomalous.
struct ScoredTestSet {
    std::vector<double> anomaly_scores;
    std::vector<int> labels;
};

// -log_score: monotone decreasing in the normality score, finite by the
// log-score floor.
double to_anomaly_score(const ScoreBreakdown& breakdown);

// Mann-Whitney statistic, ties counted half. Throws on single-class input.
double auroc(const ScoredTestSet& data);

// Step-wise average precision; equal scores collapse into one threshold.
// Throws on single-class input.
double auprc(const ScoredTestSet& data);

}  // namespace smtad
