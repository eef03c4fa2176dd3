#include "smtad/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace smtad {

namespace {

void check_two_classes(const ScoredTestSet& data, const char* op) {
    if (data.anomaly_scores.size() != data.labels.size())
        throw std::domain_error(std::string(op) + ": score/label length mismatch");
    std::size_t pos = 0;
    for (int y : data.labels) {
        if (y != 0 && y != 1) throw std::domain_error(std::string(op) + ": labels must be 0 or 1");
        pos += y;
    }
    if (pos == 0 || pos == data.labels.size())
        throw std::domain_error(std::string(op) + ": both classes must be present");
}

}  // namespace

double to_anomaly_score(const ScoreBreakdown& breakdown) {
    return -breakdown.log_score;
}

double auroc(const ScoredTestSet& data) {
    check_two_classes(data, "auroc");
    const std::size_t n = data.labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.anomaly_scores[a] < data.anomaly_scores[b];
    });

    // average ranks over tie groups, then the Mann-Whitney U statistic
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && data.anomaly_scores[order[j]] == data.anomaly_scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (data.labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    for (int y : data.labels) n_pos += y;
    const std::size_t n_neg = n - n_pos;
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(const ScoredTestSet& data) {
    check_two_classes(data, "auprc");
    const std::size_t n = data.labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.anomaly_scores[a] > data.anomaly_scores[b];
    });

    std::size_t total_pos = 0;
    for (int y : data.labels) total_pos += y;

    double ap = 0.0;
    std::size_t tp = 0, seen = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && data.anomaly_scores[order[j]] == data.anomaly_scores[order[i]]) ++j;
        std::size_t tp_gain = 0;
        for (std::size_t k = i; k < j; ++k) tp_gain += data.labels[order[k]];
        tp += tp_gain;
        seen = j;
        if (tp_gain > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(seen);
            const double recall_inc = static_cast<double>(tp_gain) / static_cast<double>(total_pos);
            ap += precision * recall_inc;
        }
        i = j;
    }
    return ap;
}

}  // namespace smtad
