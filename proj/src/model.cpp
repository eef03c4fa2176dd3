#include "smtad/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smtad/rng.hpp"

namespace smtad {

double site_frequency(int p) {
    if (p < 1 || p > 62) throw std::domain_error("site_frequency: resolution index out of range");
    return M_PI / static_cast<double>(std::uint64_t{1} << p);
}

void SignedLogProduct::multiply(double factor) {
    if (sign == 0) return;
    if (factor == 0.0) {
        sign = 0;
        log_magnitude = 0.0;
        return;
    }
    if (factor < 0.0) sign = -sign;
    log_magnitude += std::log(std::fabs(factor));
}

double SignedLogProduct::value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_magnitude);
}

SignedLogProduct SignedLogProduct::of(double value) {
    SignedLogProduct p;
    p.multiply(value);
    return p;
}

ModelParams::ModelParams(int sites_, int mixtures_, int resolutions_)
    : sites(sites_), mixtures(mixtures_), resolutions(resolutions_) {
    if (sites < 1 || mixtures < 1 || resolutions < 1)
        throw std::domain_error("ModelParams: dimensions must be positive");
    theta.assign(static_cast<std::size_t>(components()) * sites, 0.0);
    coeff.assign(static_cast<std::size_t>(components()), 1.0 / std::sqrt(static_cast<double>(components())));
}

std::size_t ModelParams::component(int m, int p) const {
    if (m < 0 || m >= mixtures || p < 1 || p > resolutions)
        throw std::domain_error("ModelParams: component index out of range");
    return static_cast<std::size_t>(m) * resolutions + (p - 1);
}

ModelParams ModelParams::random_init(int sites, int mixtures, int resolutions, std::uint64_t seed) {
    ModelParams params(sites, mixtures, resolutions);
    std::mt19937_64 rng(derive_seed(seed, SeedStream::Init));
    for (double& t : params.theta) t = uniform_real(rng, -0.1, 0.1);
    return params;
}

void ModelParams::validate() const {
    if (sites < 1 || mixtures < 1 || resolutions < 1)
        throw std::domain_error("ModelParams: dimensions must be positive");
    if (theta.size() != static_cast<std::size_t>(components()) * sites)
        throw std::domain_error("ModelParams: theta has wrong size");
    if (coeff.size() != static_cast<std::size_t>(components()))
        throw std::domain_error("ModelParams: coeff has wrong size");
    bool any_coeff = false;
    for (double c : coeff) {
        if (!std::isfinite(c)) throw std::domain_error("ModelParams: non-finite coefficient");
        if (c != 0.0) any_coeff = true;
    }
    for (double t : theta)
        if (!std::isfinite(t)) throw std::domain_error("ModelParams: non-finite angle");
    if (!any_coeff) throw std::domain_error("ModelParams: coeff identically zero");
}

std::array<double, 2> embed_site(double x_tilde, int p) {
    if (p < 1) throw std::domain_error("embed_site: resolution index must be >= 1");
    if (!std::isfinite(x_tilde) || x_tilde < 0.0 || x_tilde > 1.0)
        throw std::domain_error("embed_site: input outside [0, 1]");
    const double angle = site_frequency(p) * x_tilde;
    return {std::cos(angle), std::sin(angle)};
}

std::array<double, 2> component_site_vector(const ModelParams& params, int m, int p, int l,
                                            double x_tilde_l) {
    const std::size_t k = params.component(m, p);
    if (l < 0 || l >= params.sites) throw std::domain_error("component_site_vector: site out of range");
    const double angle = params.theta[k * params.sites + l] + site_frequency(p) * x_tilde_l;
    return {std::cos(angle), std::sin(angle)};
}

namespace detail {

double LogSum::value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_abs);
}

LogSum signed_log_sum(std::span<const SignedLogProduct> terms) {
    double scale = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.sign != 0) scale = std::max(scale, t.log_magnitude);
    LogSum out;
    if (!std::isfinite(scale)) return out;  // every term is zero
    double acc = 0.0;
    for (const auto& t : terms)
        if (t.sign != 0) acc += t.sign * std::exp(t.log_magnitude - scale);
    if (acc == 0.0) return out;
    out.sign = acc > 0.0 ? 1 : -1;
    out.log_abs = scale + std::log(std::fabs(acc));
    return out;
}

double component_angle(const ModelParams& params, int k, int l, double x_l) {
    return params.theta[static_cast<std::size_t>(k) * params.sites + l] +
           params.component_frequency(k) * x_l;
}

ScoreEval evaluate_log(const ModelParams& params, std::span<const double> x_tilde) {
    if (static_cast<int>(x_tilde.size()) != params.sites)
        throw std::domain_error("evaluate_log: sample length does not match site count");
    const int sites = params.sites;
    const int n_comp = params.components();

    // Per-component cosine products for the numerator.
    std::vector<SignedLogProduct> comp_products(n_comp);
    std::vector<SignedLogProduct> terms(n_comp);
    for (int k = 0; k < n_comp; ++k) {
        SignedLogProduct prod;
        for (int l = 0; l < sites; ++l)
            prod.multiply(std::cos(component_angle(params, k, l, x_tilde[l])));
        comp_products[k] = prod;
        prod.multiply(params.coeff[k]);
        terms[k] = prod;
    }

    ScoreEval eval;
    eval.numerator = signed_log_sum(terms);

    // Z as the sum over component pairs of c_k c_k' prod_l cos(psi), using
    // symmetry to visit each unordered pair once.
    std::vector<SignedLogProduct> pair_terms;
    pair_terms.reserve(static_cast<std::size_t>(n_comp) * (n_comp + 1) / 2);
    for (int k = 0; k < n_comp; ++k) {
        SignedLogProduct diag = SignedLogProduct::of(params.coeff[k] * params.coeff[k]);
        pair_terms.push_back(diag);  // psi = 0 at every site
        const double w_k = params.component_frequency(k);
        for (int k2 = k + 1; k2 < n_comp; ++k2) {
            const double w_k2 = params.component_frequency(k2);
            SignedLogProduct prod = SignedLogProduct::of(2.0 * params.coeff[k] * params.coeff[k2]);
            for (int l = 0; l < sites; ++l) {
                const double psi = params.theta[static_cast<std::size_t>(k) * sites + l] -
                                   params.theta[static_cast<std::size_t>(k2) * sites + l] +
                                   (w_k - w_k2) * x_tilde[l];
                prod.multiply(std::cos(psi));
            }
            pair_terms.push_back(prod);
        }
    }
    eval.z = signed_log_sum(pair_terms);
    if (eval.z.sign < 0) eval.z = LogSum{};  // squared norm: negative is pure roundoff
    return eval;
}

}  // namespace detail

double numerator(const ModelParams& params, std::span<const double> x_tilde) {
    return detail::evaluate_log(params, x_tilde).numerator.value();
}

double gram(const ModelParams& params, std::span<const double> x_tilde) {
    return detail::evaluate_log(params, x_tilde).z.value();
}

ScoreBreakdown normality_score(const ModelParams& params, std::span<const double> x_tilde) {
    const detail::ScoreEval eval = detail::evaluate_log(params, x_tilde);
    ScoreBreakdown out;
    out.numerator = eval.numerator.value();
    out.z = eval.z.value();
    if (!(out.z > kZFloor))
        throw degenerate_state_error("normality_score: normalization constant collapsed");
    if (eval.numerator.sign == 0) {
        out.score = 0.0;
        out.log_score = kLogScoreFloor;
        return out;
    }
    double log_score = 2.0 * eval.numerator.log_abs - eval.z.log_abs;
    log_score = std::clamp(log_score, kLogScoreFloor, 0.0);
    out.log_score = log_score;
    out.score = std::min(std::exp(log_score), 1.0);
    return out;
}

}  // namespace smtad
