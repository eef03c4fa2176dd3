#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smtad/model.hpp"
#include "smtad/preprocess.hpp"

namespace smtad {

// Raised when the optimizer encounters non-finite gradients or loss.
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 0;   // 0 = auto: 64 when |T| < 1e4, 512 otherwise
    long epochs = 0;      // 0 = auto: floor(15000 * |B| / |T|), at least 1
    double lambda_c = 0.01;
    double lambda_theta = 0.001;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    int resolve_batch_size(std::size_t n_train) const;
    long resolve_epochs(std::size_t n_train) const;
    void validate() const;
};

struct LossReport {
    double nll = 0.0;             // -(1/|B|) sum log_score
    double reg = 0.0;             // lambda_c |c|_F^2 + lambda_theta |theta|_F^2
    double total = 0.0;           // nll + reg
    double mean_log_score = 0.0;  // = -nll
};

struct Gradient {
    std::vector<double> theta;
    std::vector<double> coeff;

    static Gradient zeros_like(const ModelParams& params);
};

// Adam moment buffers shaped like the parameters.
struct OptimizerState {
    std::vector<double> m_theta, v_theta;
    std::vector<double> m_coeff, v_coeff;
    long step = 0;

    static OptimizerState for_params(const ModelParams& params);
};

// Batch loss through the stabilized log-score path. Rows are length-L
// samples, row-major.
LossReport loss(const ModelParams& params, std::span<const double> batch_rows, std::size_t n_rows,
                double lambda_c, double lambda_theta);

// Mean per-sample analytic gradient of the total loss (data term plus
// regularizer). Reference implementation: per-sample signed-log evaluation,
// accumulated in sample order.
Gradient gradient(const ModelParams& params, std::span<const double> batch_rows,
                  std::size_t n_rows, double lambda_c, double lambda_theta);

// Bias-corrected adaptive-moment update. No decoupled weight decay: all
// shrinkage flows through the loss regularizer. Throws numerical_error on
// non-finite gradients.
void adam_step(ModelParams& params, const Gradient& grad, OptimizerState& state,
               const TrainConfig& config);

struct TrainResult {
    ModelParams params;
    std::vector<LossReport> history;  // per-epoch means
    int batch_size = 0;
    long epochs = 0;
    bool diverged = false;
    std::string diagnostic;
};

// Full training loop over the Train-tagged rows of `data`: seeded init,
// per-epoch reshuffled mini-batches, Adam updates. Deterministic for a given
// (seed, config, data) regardless of n_threads. On divergence returns the
// last finite parameters with `diverged` set.
TrainResult train(const NormalizedDataset& data, int mixtures, int resolutions,
                  const TrainConfig& config, int n_threads = 1);

namespace detail {

// Fused batch loss + gradient used by the training loop. Matches
// loss()/gradient() to floating-point reordering tolerance but runs the
// whole batch through vectorizable prefix/suffix passes. Exposed for the
// equivalence tests.
struct BatchEval {
    LossReport loss;
    Gradient grad;
};
BatchEval batch_eval(const ModelParams& params, std::span<const double> batch_rows,
                     std::size_t n_rows, double lambda_c, double lambda_theta, int n_threads = 1);

}  // namespace detail

}  // namespace smtad
