#include "smtad/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace smtad::oracle {

DenseState build_dense_state(const ModelParams& params, std::span<const double> x_tilde) {
    params.validate();
    if (static_cast<int>(x_tilde.size()) != params.sites)
        throw std::domain_error("build_dense_state: sample length does not match site count");
    if (params.sites > kMaxDenseSites)
        throw std::domain_error("build_dense_state: too many sites for a dense expansion");

    const int sites = params.sites;
    const std::size_t dim = std::size_t{1} << sites;
    DenseState state;
    state.sites = sites;
    state.amplitudes.assign(dim, 0.0);

    std::vector<double> kron(dim), next(dim);
    for (int k = 0; k < params.components(); ++k) {
        const double omega = params.component_frequency(k);
        kron[0] = params.coeff[k];
        std::size_t size = 1;
        for (int l = 0; l < sites; ++l) {
            const double angle = params.theta[static_cast<std::size_t>(k) * sites + l] + omega * x_tilde[l];
            const double c = std::cos(angle), s = std::sin(angle);
            for (std::size_t i = 0; i < size; ++i) {
                next[2 * i] = kron[i] * c;
                next[2 * i + 1] = kron[i] * s;
            }
            size *= 2;
            std::swap(kron, next);
        }
        for (std::size_t i = 0; i < dim; ++i) state.amplitudes[i] += kron[i];
    }
    return state;
}

double dense_score(const DenseState& state) {
    double norm2 = 0.0;
    for (double a : state.amplitudes) norm2 += a * a;
    if (norm2 <= 0.0) throw degenerate_state_error("dense_score: zero state");
    return state.amplitudes[0] * state.amplitudes[0] / norm2;
}

ReducedDensityMatrix dense_partial_trace(const DenseState& state, std::span<const int> keep) {
    if (keep.size() != 1 && keep.size() != 2)
        throw std::domain_error("dense_partial_trace: keep set must have size 1 or 2");
    for (int s : keep)
        if (s < 0 || s >= state.sites) throw std::domain_error("dense_partial_trace: site out of range");
    if (keep.size() == 2 && keep[0] >= keep[1])
        throw std::domain_error("dense_partial_trace: kept sites must be distinct and ascending");

    double norm2 = 0.0;
    for (double a : state.amplitudes) norm2 += a * a;
    if (norm2 <= 0.0) throw degenerate_state_error("dense_partial_trace: zero state");

    const int sites = state.sites;
    const std::size_t dim = state.amplitudes.size();
    const int rdm_dim = keep.size() == 1 ? 2 : 4;
    ReducedDensityMatrix rho;
    rho.dim = rdm_dim;
    rho.entries.assign(static_cast<std::size_t>(rdm_dim) * rdm_dim, 0.0);

    // site l lives at bit (sites - 1 - l); min kept site is the slow index
    std::size_t kept_mask = 0;
    for (int s : keep) kept_mask |= std::size_t{1} << (sites - 1 - s);
    auto kept_bits = [&](std::size_t index) {
        int r = 0;
        for (int s : keep) r = (r << 1) | static_cast<int>((index >> (sites - 1 - s)) & 1);
        return r;
    };
    auto spread_bits = [&](int r) {
        std::size_t index = 0;
        for (std::size_t s = 0; s < keep.size(); ++s) {
            const int bit = (r >> (keep.size() - 1 - s)) & 1;
            if (bit) index |= std::size_t{1} << (sites - 1 - keep[s]);
        }
        return index;
    };

    for (std::size_t i = 0; i < dim; ++i) {
        const int row = kept_bits(i);
        const std::size_t traced = i & ~kept_mask;
        for (int col = 0; col < rdm_dim; ++col) {
            const std::size_t j = traced | spread_bits(col);
            rho.at(row, col) += state.amplitudes[i] * state.amplitudes[j] / norm2;
        }
    }
    return rho;
}

}  // namespace smtad::oracle
