#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace smtad {

// Thrown when the parameters collapse the output state (Z below the floor),
// leaving the normality score undefined.
class degenerate_state_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kZFloor = 1e-30;
// Stand-in for ln(0) when the numerator vanishes exactly; just below
// ln(smallest positive double), so an exact-zero score still ranks as more
// anomalous than any representable positive score.
inline constexpr double kLogScoreFloor = -745.0;

// omega_p = pi / 2^p for the 1-based resolution index p.
double site_frequency(int p);

// Signed-log representation of a product of real factors. Underflow-safe
// accumulation of L-fold cosine products: sign in {-1,0,+1} plus ln|value|.
struct SignedLogProduct {
    int sign = 1;
    double log_magnitude = 0.0;

    void multiply(double factor);
    double value() const;
    static SignedLogProduct of(double value);
};

// Learnable parameter set Theta = {c_mp, theta^mp_l} plus dimensions.
// Component index k = m * resolutions + (p - 1) flattens the (m, p) grid;
// theta is (k, l) row-major. m and l are 0-based throughout, the resolution
// index p is 1-based to match omega_p = pi/2^p. Frequencies are always
// derived from p, never stored.
struct ModelParams {
    int sites = 0;        // L
    int mixtures = 0;     // M
    int resolutions = 0;  // P
    std::vector<double> theta;
    std::vector<double> coeff;

    ModelParams() = default;
    ModelParams(int sites_, int mixtures_, int resolutions_);

    int components() const { return mixtures * resolutions; }
    std::size_t learnable_count() const {
        return static_cast<std::size_t>(mixtures) * resolutions * (sites + 1);
    }

    double theta_at(int m, int p, int l) const { return theta[component(m, p) * static_cast<std::size_t>(sites) + l]; }
    double& theta_at(int m, int p, int l) { return theta[component(m, p) * static_cast<std::size_t>(sites) + l]; }
    double coeff_at(int m, int p) const { return coeff[component(m, p)]; }
    double& coeff_at(int m, int p) { return coeff[component(m, p)]; }

    std::size_t component(int m, int p) const;  // validates indices
    // Frequency of flat component k, i.e. omega of its resolution.
    double component_frequency(int k) const { return site_frequency(k % resolutions + 1); }

    // theta ~ U(-0.1, 0.1), coeff = 1/sqrt(MP): near-even superposition of
    // near-identity rotations, so initial scores are non-degenerate.
    static ModelParams random_init(int sites, int mixtures, int resolutions, std::uint64_t seed);

    void validate() const;  // shapes, finiteness, coeff not identically zero
};

// Breakdown of one normality-score evaluation. `numerator` and `z` are the
// direct-domain values and may under/overflow at extremes; `log_score` is
// the stabilized quantity and is always finite.
struct ScoreBreakdown {
    double numerator = 0.0;
    double z = 0.0;
    double score = 0.0;
    double log_score = 0.0;
};

// (cos(omega_p x), sin(omega_p x)) — the site factor of the input MPS.
std::array<double, 2> embed_site(double x_tilde, int p);

// (cos(theta^mp_l + omega_p x), sin(theta^mp_l + omega_p x)) — site factor of
// the (m, p) output-MPS component.
std::array<double, 2> component_site_vector(const ModelParams& params, int m, int p, int l,
                                            double x_tilde_l);

// <0...0|Phi~>: sum over components of c_mp * prod_l cos(theta + omega x).
double numerator(const ModelParams& params, std::span<const double> x_tilde);

// Z = <Phi~|Phi~>, the normalization constant. Clamped to 0 when roundoff
// drives the squared norm slightly negative.
double gram(const ModelParams& params, std::span<const double> x_tilde);

// Normality score a = numerator^2 / Z in [0, 1]. Throws
// degenerate_state_error when Z <= kZFloor.
ScoreBreakdown normality_score(const ModelParams& params, std::span<const double> x_tilde);

namespace detail {

// Signed-log scalar, the result of summing signed-log terms at a common scale.
struct LogSum {
    int sign = 0;
    double log_abs = 0.0;

    double value() const;
};

LogSum signed_log_sum(std::span<const SignedLogProduct> terms);

// Log-domain numerator and Z for one sample; shared by scoring, training
// fallback and tests.
struct ScoreEval {
    LogSum numerator;
    LogSum z;
};

ScoreEval evaluate_log(const ModelParams& params, std::span<const double> x_tilde);

// Angle of component k at site l: theta_{k,l} + omega_{p(k)} * x_l.
double component_angle(const ModelParams& params, int k, int l, double x_l);

}  // namespace detail

}  // namespace smtad
