#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "smtad/preprocess.hpp"
#include "smtad/rng.hpp"

using namespace smtad;

namespace {

RawDataset column_dataset(std::vector<double> values, std::vector<int> labels = {}) {
    RawDataset d;
    d.rows = values.size();
    d.cols = 1;
    d.values = std::move(values);
    d.labels = labels.empty() ? std::vector<int>(d.rows, 0) : std::move(labels);
    return d;
}

}  // namespace

TEST_CASE("continuous rank transform maps the reference to k/N") {
    const auto data = column_dataset({3.2, 1.1, 2.5});
    const auto norm = fit_rank_normalizer(data, /*discrete_threshold=*/2);
    REQUIRE(norm.features[0].mode == FeatureMode::Continuous);
    const auto out = transform(norm, data.values, 3, 1);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(1.0 / 3.0));
    CHECK(out[2] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ties receive average ranks") {
    const auto data = column_dataset({2.0, 2.0, 5.0});
    const auto norm = fit_rank_normalizer(data, /*discrete_threshold=*/1);
    REQUIRE(norm.features[0].mode == FeatureMode::Continuous);
    const auto out = transform(norm, data.values, 3, 1);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(1.0));
}

TEST_CASE("discrete levels map to rank over level count") {
    const auto data = column_dataset({1.0, 2.0, 3.0, 2.0, 1.0, 3.0});
    const auto norm = fit_rank_normalizer(data, 3);
    REQUIRE(norm.features[0].mode == FeatureMode::Discrete);
    CHECK(norm.features[0].reference_size == 3);
    const std::vector<double> probe = {2.0};
    CHECK(transform(norm, probe, 1, 1)[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("constant feature becomes a single discrete level mapping to 1") {
    const auto data = column_dataset({7.0, 7.0, 7.0});
    const auto norm = fit_rank_normalizer(data, 0);
    REQUIRE(norm.features[0].mode == FeatureMode::Discrete);
    CHECK(norm.features[0].reference_size == 1);
    const std::vector<double> probe = {7.0, 100.0, -5.0};
    const auto out = transform(norm, probe, 3, 1);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(1.0));
    CHECK(out[2] == doctest::Approx(1.0));
}

TEST_CASE("out-of-reference continuous values interpolate and clamp") {
    const auto data = column_dataset({1.0, 2.0, 3.0, 4.0});
    const auto norm = fit_rank_normalizer(data, 2);
    REQUIRE(norm.features[0].mode == FeatureMode::Continuous);
    const std::vector<double> probe = {2.5, 0.0, 100.0, 1.5};
    const auto out = transform(norm, probe, 4, 1);
    CHECK(out[0] == doctest::Approx(0.625));       // midway between 2/4 and 3/4
    CHECK(out[1] == doctest::Approx(1.0 / 8.0));   // below range: 1/(2N)
    CHECK(out[2] == doctest::Approx(1.0));         // above range
    CHECK(out[3] == doctest::Approx(0.375));
}

TEST_CASE("unseen discrete level snaps to the nearest level") {
    const auto data = column_dataset({0.0, 10.0, 0.0, 10.0});
    const auto norm = fit_rank_normalizer(data, 5);
    REQUIRE(norm.features[0].mode == FeatureMode::Discrete);
    const std::vector<double> probe = {1.0, 9.0, 5.0, -3.0, 25.0};
    const auto out = transform(norm, probe, 5, 1);
    CHECK(out[0] == doctest::Approx(0.5));  // nearest 0
    CHECK(out[1] == doctest::Approx(1.0));  // nearest 10
    CHECK(out[2] == doctest::Approx(0.5));  // tie goes to the lower level
    CHECK(out[3] == doctest::Approx(0.5));
    CHECK(out[4] == doctest::Approx(1.0));
}

TEST_CASE("transform rejects non-finite values and width mismatch") {
    const auto data = column_dataset({1.0, 2.0, 3.0});
    const auto norm = fit_rank_normalizer(data, 0);
    const std::vector<double> bad = {std::nan("")};
    CHECK_THROWS_AS(transform(norm, bad, 1, 1), std::domain_error);
    const std::vector<double> two = {1.0, 2.0};
    CHECK_THROWS_AS(transform(norm, two, 1, 2), std::domain_error);
}

TEST_CASE("transform is monotone per feature") {
    std::mt19937_64 rng(7);
    std::vector<double> ref(200);
    for (double& v : ref) v = uniform_real(rng, -50.0, 50.0);
    const auto data = column_dataset(ref);
    for (int threshold : {0, 30}) {
        const auto norm = fit_rank_normalizer(data, threshold);
        std::vector<double> probe(400);
        for (double& v : probe) v = uniform_real(rng, -80.0, 80.0);
        std::sort(probe.begin(), probe.end());
        const auto out = transform(norm, probe, probe.size(), 1);
        for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i] >= out[i - 1]);
        for (double v : out) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("tie-free reference transforms to the exact uniform grid") {
    std::mt19937_64 rng(9);
    std::vector<double> ref(117);
    std::set<double> seen;
    for (double& v : ref) {
        do {
            v = uniform_real(rng, 0.0, 1000.0);
        } while (!seen.insert(v).second);
    }
    const auto data = column_dataset(ref);
    const auto norm = fit_rank_normalizer(data, 10);
    const auto out = transform(norm, data.values, data.rows, 1);
    std::vector<double> sorted_out = out;
    std::sort(sorted_out.begin(), sorted_out.end());
    for (std::size_t i = 0; i < sorted_out.size(); ++i)
        CHECK(sorted_out[i] == doctest::Approx(static_cast<double>(i + 1) / 117.0).epsilon(1e-12));
}

TEST_CASE("split tags the exact training count, deterministically") {
    NormalizedDataset data;
    data.rows = 129;
    data.cols = 1;
    data.values.assign(129, 0.5);
    data.labels.assign(129, 0);
    for (int i = 0; i < 10; ++i) data.labels[12 * i + 3] = 1;  // 119 normal, 10 anomalous

    const auto split_a = split(data, 0.5, 42);
    CHECK(split_a.count_tag(SplitTag::Train) == 59);
    CHECK(split_a.count_tag(SplitTag::TestNormal) == 60);
    CHECK(split_a.count_tag(SplitTag::TestAnomalous) == 10);

    const auto split_b = split(data, 0.5, 42);
    CHECK(split_a.tags == split_b.tags);
    const auto split_c = split(split_a, 0.5, 42);  // re-tagging is a no-op
    CHECK(split_c.tags == split_a.tags);
    const auto split_d = split(data, 0.5, 43);
    CHECK(split_d.tags != split_a.tags);
}

TEST_CASE("anomalous rows never enter the training tag") {
    NormalizedDataset data;
    data.rows = 64;
    data.cols = 1;
    data.values.assign(64, 0.1);
    data.labels.assign(64, 0);
    for (int i = 0; i < 64; i += 3) data.labels[i] = 1;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto tagged = split(data, 0.4, seed);
        for (std::size_t r = 0; r < tagged.rows; ++r)
            if (tagged.labels[r] == 1) CHECK(tagged.tags[r] == SplitTag::TestAnomalous);
    }
}

TEST_CASE("split rejects degenerate inputs") {
    NormalizedDataset all_anomalous;
    all_anomalous.rows = 4;
    all_anomalous.cols = 1;
    all_anomalous.values.assign(4, 0.2);
    all_anomalous.labels.assign(4, 1);
    CHECK_THROWS_AS(split(all_anomalous, 0.5, 1), std::runtime_error);

    NormalizedDataset ok;
    ok.rows = 4;
    ok.cols = 1;
    ok.values.assign(4, 0.2);
    ok.labels.assign(4, 0);
    CHECK_THROWS_AS(split(ok, 0.0, 1), std::domain_error);
    CHECK_THROWS_AS(split(ok, 1.0, 1), std::domain_error);
}

TEST_CASE("raw dataset validation") {
    RawDataset d;
    d.rows = 2;
    d.cols = 1;
    d.values = {1.0, 2.0};
    d.labels = {0, 2};
    CHECK_THROWS_AS(d.validate(), std::domain_error);
    d.labels = {0, 1};
    CHECK_NOTHROW(d.validate());
    d.values[0] = std::nan("");
    CHECK_THROWS_AS(d.validate(), std::domain_error);
}
