#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "smtad/rng.hpp"
#include "smtad/training.hpp"
#include "support/random_instances.hpp"
#include "support/synthetic.hpp"

using namespace smtad;
using testsupport::close;
using testsupport::random_instance;

namespace {

// Central finite differences of the total loss, the independent oracle for
// the analytic gradient.
Gradient finite_difference_gradient(ModelParams params, std::span<const double> batch,
                                    std::size_t n_rows, double lambda_c, double lambda_theta,
                                    double h = 1e-5) {
    Gradient g = Gradient::zeros_like(params);
    for (std::size_t i = 0; i < params.theta.size(); ++i) {
        const double saved = params.theta[i];
        params.theta[i] = saved + h;
        const double up = loss(params, batch, n_rows, lambda_c, lambda_theta).total;
        params.theta[i] = saved - h;
        const double down = loss(params, batch, n_rows, lambda_c, lambda_theta).total;
        params.theta[i] = saved;
        g.theta[i] = (up - down) / (2.0 * h);
    }
    for (std::size_t i = 0; i < params.coeff.size(); ++i) {
        const double saved = params.coeff[i];
        params.coeff[i] = saved + h;
        const double up = loss(params, batch, n_rows, lambda_c, lambda_theta).total;
        params.coeff[i] = saved - h;
        const double down = loss(params, batch, n_rows, lambda_c, lambda_theta).total;
        params.coeff[i] = saved;
        g.coeff[i] = (up - down) / (2.0 * h);
    }
    return g;
}

bool gradient_matches(const Gradient& got, const Gradient& want, double rel, double abs_tol) {
    for (std::size_t i = 0; i < got.theta.size(); ++i)
        if (!close(got.theta[i], want.theta[i], rel, abs_tol)) return false;
    for (std::size_t i = 0; i < got.coeff.size(); ++i)
        if (!close(got.coeff[i], want.coeff[i], rel, abs_tol)) return false;
    return true;
}

}  // namespace

TEST_CASE("loss closed-form cases") {
    // every score = 1, lambda = 0 -> zero loss
    ModelParams ones(3, 1, 1);
    ones.coeff[0] = 1.0;
    const std::vector<double> batch = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    const LossReport r0 = loss(ones, batch, 2, 0.0, 0.0);
    CHECK(r0.nll == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r0.reg == 0.0);
    CHECK(r0.total == doctest::Approx(0.0).epsilon(1e-12));

    // single sample with score exp(-2): loss 2
    ModelParams tilt(1, 1, 1);
    tilt.coeff[0] = 1.0;
    tilt.theta[0] = std::acos(std::exp(-1.0));  // cos^2 = e^-2
    const std::vector<double> one_row = {0.0};
    CHECK(loss(tilt, one_row, 1, 0.0, 0.0).total == doctest::Approx(2.0).epsilon(1e-9));

    // regularizer arithmetic: |c|^2 = 4, theta = 0
    ModelParams reg(2, 2, 2);
    reg.coeff = {1.0, 1.0, 1.0, 1.0};
    const std::vector<double> rows = {0.0, 0.0};
    const LossReport r = loss(reg, rows, 1, 0.01, 0.001);
    CHECK(r.reg == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(r.total == r.nll + r.reg);
}

TEST_CASE("loss decomposition holds exactly") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 50; ++i) {
        const auto inst = random_instance(rng, 8, 3, 2);
        try {
            const LossReport r = loss(inst.params, inst.x, 1, 0.02, 0.003);
            CHECK(r.total == r.nll + r.reg);
            CHECK(r.mean_log_score == -r.nll);
        } catch (const degenerate_state_error&) {
        }
    }
}

TEST_CASE("gradient vanishes at the exact optimum") {
    ModelParams params(4, 1, 1);
    params.coeff[0] = 1.0;
    const std::vector<double> x = {0.0, 0.0, 0.0, 0.0};
    const Gradient g = gradient(params, x, 1, 0.0, 0.0);
    for (double v : g.theta) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("coefficient gradient obeys the Euler identity for the data term") {
    // the score is 0-homogeneous in c, so sum_k c_k dL0/dc_k = 0
    std::mt19937_64 rng(78);
    for (int i = 0; i < 50; ++i) {
        const auto inst = random_instance(rng, 8, 4, 3);
        try {
            const Gradient g = gradient(inst.params, inst.x, 1, 0.0, 0.0);
            double dot = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < g.coeff.size(); ++k) {
                dot += inst.params.coeff[k] * g.coeff[k];
                scale += std::fabs(inst.params.coeff[k] * g.coeff[k]);
            }
            CHECK(std::fabs(dot) <= 1e-9 * std::max(1.0, scale));
        } catch (const degenerate_state_error&) {
        }
    }
}

TEST_CASE("regularizer-only gradient is 2 lambda times the parameters") {
    ModelParams params(3, 2, 2);
    std::mt19937_64 rng(79);
    for (double& t : params.theta) t = uniform_real(rng, -1.0, 1.0);
    for (double& c : params.coeff) c = uniform_real(rng, 0.5, 1.5);
    const std::vector<double> x = {0.3, 0.6, 0.9};
    const Gradient with_reg = gradient(params, x, 1, 0.05, 0.02);
    const Gradient without = gradient(params, x, 1, 0.0, 0.0);
    for (std::size_t i = 0; i < params.theta.size(); ++i)
        CHECK(with_reg.theta[i] - without.theta[i] ==
              doctest::Approx(2.0 * 0.02 * params.theta[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < params.coeff.size(); ++i)
        CHECK(with_reg.coeff[i] - without.coeff[i] ==
              doctest::Approx(2.0 * 0.05 * params.coeff[i]).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(80);
    int checked = 0;
    while (checked < 25) {
        const auto inst = random_instance(rng, 8, 3, 3);
        // small random batch around the drawn sample
        const std::size_t n_rows = 1 + uniform_index(rng, 3);
        std::vector<double> batch;
        for (std::size_t r = 0; r < n_rows; ++r)
            for (int l = 0; l < inst.params.sites; ++l) batch.push_back(uniform_unit(rng));
        const double lc = uniform_unit(rng) * 0.05;
        const double lt = uniform_unit(rng) * 0.01;
        try {
            const Gradient analytic = gradient(inst.params, batch, n_rows, lc, lt);
            const Gradient fd = finite_difference_gradient(inst.params, batch, n_rows, lc, lt);
            CHECK(gradient_matches(analytic, fd, 1e-5, 1e-7));
            ++checked;
        } catch (const degenerate_state_error&) {
        }
    }
}

TEST_CASE("fused batch kernel agrees with the reference gradient") {
    std::mt19937_64 rng(81);
    for (int i = 0; i < 30; ++i) {
        const auto inst = random_instance(rng, 10, 4, 3);
        const std::size_t n_rows = 1 + uniform_index(rng, 8);
        std::vector<double> batch;
        for (std::size_t r = 0; r < n_rows; ++r)
            for (int l = 0; l < inst.params.sites; ++l) batch.push_back(uniform_unit(rng));
        try {
            const Gradient reference = gradient(inst.params, batch, n_rows, 0.01, 0.001);
            const LossReport ref_loss = loss(inst.params, batch, n_rows, 0.01, 0.001);
            for (int threads : {1, 2, 4}) {
                const auto fused =
                    detail::batch_eval(inst.params, batch, n_rows, 0.01, 0.001, threads);
                CHECK(close(fused.loss.total, ref_loss.total, 1e-9, 1e-12));
                CHECK(gradient_matches(fused.grad, reference, 1e-9, 1e-11));
            }
        } catch (const degenerate_state_error&) {
        }
    }
}

TEST_CASE("fused kernel falls back cleanly on parked cosines") {
    // a site parked at pi/2 sends the direct-domain numerator to ~0; the
    // stable path must keep loss and gradient finite
    ModelParams params(6, 2, 2);
    params.coeff = {0.7, 0.7, 0.1, 0.1};
    std::mt19937_64 rng(82);
    for (double& t : params.theta) t = uniform_real(rng, -0.3, 0.3);
    params.theta[0] = std::acos(0.0);  // ~pi/2
    std::vector<double> row(6, 0.0);
    const auto eval = detail::batch_eval(params, row, 1, 0.0, 0.0);
    CHECK(std::isfinite(eval.loss.total));
    for (double g : eval.grad.theta) CHECK(std::isfinite(g));
}

TEST_CASE("batch gradient equals the mean of per-sample gradients") {
    std::mt19937_64 rng(83);
    const auto inst = random_instance(rng, 8, 3, 2);
    const std::size_t n_rows = 16;
    std::vector<double> batch;
    for (std::size_t r = 0; r < n_rows * inst.params.sites; ++r) batch.push_back(uniform_unit(rng));

    const Gradient whole = gradient(inst.params, batch, n_rows, 0.0, 0.0);
    Gradient mean = Gradient::zeros_like(inst.params);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const Gradient g = gradient(
            inst.params,
            std::span<const double>(batch).subspan(r * inst.params.sites, inst.params.sites), 1,
            0.0, 0.0);
        for (std::size_t i = 0; i < mean.theta.size(); ++i) mean.theta[i] += g.theta[i];
        for (std::size_t i = 0; i < mean.coeff.size(); ++i) mean.coeff[i] += g.coeff[i];
    }
    for (double& v : mean.theta) v /= static_cast<double>(n_rows);
    for (double& v : mean.coeff) v /= static_cast<double>(n_rows);
    CHECK(gradient_matches(whole, mean, 1e-12, 1e-13));
}

TEST_CASE("adam closed-form steps") {
    ModelParams params(2, 1, 1);
    params.coeff[0] = 1.0;
    TrainConfig config;
    config.learning_rate = 0.1;

    OptimizerState state = OptimizerState::for_params(params);
    Gradient zero = Gradient::zeros_like(params);
    const ModelParams before = params;
    adam_step(params, zero, state, config);
    CHECK(state.step == 1);
    CHECK(params.theta == before.theta);
    CHECK(params.coeff == before.coeff);

    // beta1 = beta2 = 0: update is -lr g / (|g| + eps)
    TrainConfig raw = config;
    raw.beta1 = 0.0;
    raw.beta2 = 0.0;
    ModelParams p2(2, 1, 1);
    p2.coeff[0] = 1.0;
    OptimizerState s2 = OptimizerState::for_params(p2);
    Gradient g2 = Gradient::zeros_like(p2);
    g2.theta = {0.5, -2.0};
    g2.coeff = {0.0};
    adam_step(p2, g2, s2, raw);
    CHECK(p2.theta[0] == doctest::Approx(-0.1 * 0.5 / (0.5 + raw.epsilon)).epsilon(1e-12));
    CHECK(p2.theta[1] == doctest::Approx(0.1 * 2.0 / (2.0 + raw.epsilon)).epsilon(1e-12));

    // constant gradient: motion stays opposite to the gradient sign
    ModelParams p3(1, 1, 1);
    p3.coeff[0] = 1.0;
    OptimizerState s3 = OptimizerState::for_params(p3);
    Gradient g3 = Gradient::zeros_like(p3);
    g3.theta = {1.0};
    const double start = p3.theta[0];
    adam_step(p3, g3, s3, config);
    const double after_one = p3.theta[0];
    adam_step(p3, g3, s3, config);
    CHECK(after_one < start);
    CHECK(p3.theta[0] < after_one);

    Gradient bad = Gradient::zeros_like(p3);
    bad.theta = {std::nan("")};
    CHECK_THROWS_AS(adam_step(p3, bad, s3, config), numerical_error);
}

TEST_CASE("auto epoch schedule") {
    TrainConfig config;
    CHECK(config.resolve_batch_size(59) == 64);
    CHECK(config.resolve_batch_size(9999) == 64);
    CHECK(config.resolve_batch_size(10000) == 512);
    CHECK(config.resolve_epochs(59) == 16271);     // floor(15000 * 64 / 59)
    CHECK(config.resolve_epochs(142403) == 53);    // floor(15000 * 512 / 142403)
    CHECK(config.resolve_epochs(100000000) == 1);  // clamped
    config.batch_size = 64;
    config.epochs = 7;
    CHECK(config.resolve_epochs(59) == 7);
}

TEST_CASE("training lowers the loss on clustered synthetic data") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = testsupport::clustered_dataset(500, 4, seed);
        TrainConfig config;
        config.batch_size = 64;
        config.epochs = 200;
        config.seed = seed;
        const TrainResult result = train(data, 4, 2, config);
        REQUIRE_FALSE(result.diverged);
        REQUIRE(result.history.size() == 200);
        CHECK(result.history.back().nll < result.history.front().nll);
    }
}

TEST_CASE("training history is deterministic") {
    const auto data = testsupport::clustered_dataset(200, 3, 7);
    TrainConfig config;
    config.batch_size = 32;
    config.epochs = 40;
    config.seed = 123;
    const TrainResult a = train(data, 3, 2, config);
    const TrainResult b = train(data, 3, 2, config, 2);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].total == b.history[e].total);
        CHECK(a.history[e].nll == b.history[e].nll);
    }
    CHECK(a.params.theta == b.params.theta);
    CHECK(a.params.coeff == b.params.coeff);
}

TEST_CASE("training requires a split with train rows") {
    NormalizedDataset data;
    data.rows = 4;
    data.cols = 2;
    data.values.assign(8, 0.5);
    data.labels.assign(4, 0);
    TrainConfig config;
    config.epochs = 1;
    CHECK_THROWS(train(data, 2, 1, config));  // no tags assigned
}
