#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "smtad/metrics.hpp"
#include "smtad/rng.hpp"

using namespace smtad;

namespace {

// Exhaustive pair-counting oracle for AUROC: P(positive outranks negative),
// ties half.
double auroc_pairs(const ScoredTestSet& data) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (data.labels[i] != 1) continue;
        for (std::size_t j = 0; j < data.labels.size(); ++j) {
            if (data.labels[j] != 0) continue;
            ++pairs;
            if (data.anomaly_scores[i] > data.anomaly_scores[j])
                wins += 1.0;
            else if (data.anomaly_scores[i] == data.anomaly_scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("anomaly score inverts the log score monotonically") {
    ScoreBreakdown perfect;
    perfect.score = 1.0;
    perfect.log_score = 0.0;
    CHECK(to_anomaly_score(perfect) == 0.0);

    ScoreBreakdown faint;
    faint.score = std::exp(-5.0);
    faint.log_score = -5.0;
    CHECK(to_anomaly_score(faint) == doctest::Approx(5.0));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        ScoreBreakdown a, b;
        a.log_score = -uniform_real(rng, 0.0, 700.0);
        b.log_score = a.log_score - uniform_real(rng, 1e-9, 10.0);
        CHECK(to_anomaly_score(b) > to_anomaly_score(a));  // smaller score, larger anomaly
    }
}

TEST_CASE("auroc on the spec anchors") {
    CHECK(auroc({{0.9, 0.1, 0.2}, {1, 0, 0}}) == doctest::Approx(1.0));
    CHECK(auroc({{0.1, 0.9}, {1, 0}}) == doctest::Approx(0.0));
    // pair counting over 4 pairs: (1 + 1 + 0.5 + 1) / 4
    const ScoredTestSet tied{{0.5, 0.8, 0.5, 0.2}, {1, 1, 0, 0}};
    CHECK(auroc(tied) == doctest::Approx(0.875));
    CHECK(auroc(tied) == doctest::Approx(auroc_pairs(tied)));
}

TEST_CASE("auroc equals the pair-counting oracle on random data") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        ScoredTestSet data;
        const std::size_t n = 10 + uniform_index(rng, 50);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores force plenty of ties
            data.anomaly_scores.push_back(std::floor(uniform_real(rng, 0.0, 8.0)) / 8.0);
            data.labels.push_back(uniform_unit(rng) < 0.4 ? 1 : 0);
            has_pos |= data.labels.back() == 1;
            has_neg |= data.labels.back() == 0;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(auroc(data) == doctest::Approx(auroc_pairs(data)).epsilon(1e-12));
    }
}

TEST_CASE("auprc on the spec anchors") {
    CHECK(auprc({{0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}}) == doctest::Approx(1.0));
    // one positive ranked last of n=4: precision 1/4 at the single cut
    CHECK(auprc({{0.9, 0.8, 0.7, 0.1}, {0, 0, 0, 1}}) == doctest::Approx(0.25));
    // hand step-sum: cuts at recall 1/2 (precision 1) and recall 1 (precision 2/3)
    CHECK(auprc({{0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0}}) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("auprc groups tied scores into one cut") {
    // all four rows share one score: single cut, precision = prevalence
    const ScoredTestSet tied{{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}};
    CHECK(auprc(tied) == doctest::Approx(0.5));
}

TEST_CASE("single-class inputs are rejected") {
    CHECK_THROWS_AS(auroc({{0.1, 0.2}, {1, 1}}), std::domain_error);
    CHECK_THROWS_AS(auroc({{0.1, 0.2}, {0, 0}}), std::domain_error);
    CHECK_THROWS_AS(auprc({{0.1, 0.2}, {1, 1}}), std::domain_error);
    CHECK_THROWS_AS(auprc({{0.1, 0.2}, {0, 0}}), std::domain_error);
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        ScoredTestSet data;
        for (int i = 0; i < 40; ++i) {
            data.anomaly_scores.push_back(uniform_real(rng, -4.0, 4.0));
            data.labels.push_back(i % 3 == 0 ? 1 : 0);
        }
        const double base = auroc(data);
        ScoredTestSet warped = data;
        for (double& s : warped.anomaly_scores) s = std::exp(0.5 * s) + 3.0 * s;
        CHECK(auroc(warped) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("auroc of negated tie-free scores complements to one") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        ScoredTestSet data;
        std::set<double> seen;
        for (int i = 0; i < 30; ++i) {
            double s;
            do {
                s = uniform_real(rng, 0.0, 1.0);
            } while (!seen.insert(s).second);
            data.anomaly_scores.push_back(s);
            data.labels.push_back(i % 4 == 0 ? 1 : 0);
        }
        ScoredTestSet negated = data;
        for (double& s : negated.anomaly_scores) s = -s;
        CHECK(auroc(data) + auroc(negated) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("metrics ignore input row order") {
    std::mt19937_64 rng(17);
    ScoredTestSet data;
    for (int i = 0; i < 60; ++i) {
        data.anomaly_scores.push_back(std::floor(uniform_real(rng, 0.0, 10.0)));
        data.labels.push_back(i % 5 == 0 ? 1 : 0);
    }
    const double roc = auroc(data), prc = auprc(data);
    std::vector<std::size_t> order(data.labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    fisher_yates_shuffle(order, rng);
    ScoredTestSet shuffled;
    for (std::size_t i : order) {
        shuffled.anomaly_scores.push_back(data.anomaly_scores[i]);
        shuffled.labels.push_back(data.labels[i]);
    }
    CHECK(auroc(shuffled) == doctest::Approx(roc).epsilon(1e-14));
    CHECK(auprc(shuffled) == doctest::Approx(prc).epsilon(1e-14));
}

TEST_CASE("random rankings average to the prevalence baseline") {
    // statistical: mean AUPRC over shuffled scores approximates the positive
    // prevalence within 3 sigma
    std::mt19937_64 rng(19);
    const std::size_t n = 200, n_pos = 30;
    ScoredTestSet data;
    data.labels.assign(n, 0);
    for (std::size_t i = 0; i < n_pos; ++i) data.labels[i] = 1;
    data.anomaly_scores.resize(n);

    const int shuffles = 10000;
    std::vector<double> values(shuffles);
    for (int t = 0; t < shuffles; ++t) {
        for (double& s : data.anomaly_scores) s = uniform_unit(rng);
        values[t] = auprc(data);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= shuffles;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (shuffles - 1);
    const double sem = std::sqrt(var / shuffles);
    const double prevalence = static_cast<double>(n_pos) / n;
    // random-ranking AP has a known positive bias of order log(n)/n above
    // the prevalence (~0.02 at n=200, n_pos=30); allow it on top of 3 sigma
    CHECK(mean >= prevalence - 3.0 * sem);
    CHECK(mean <= prevalence + 3.0 * sem + 0.03);
}
