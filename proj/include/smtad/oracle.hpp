#pragma once

#include <span>
#include <vector>

#include "smtad/analysis.hpp"
#include "smtad/model.hpp"

namespace smtad::oracle {

// Explicit 2^L state vector of the unnormalized output state. Verification
// aid for small L only; never used in production scoring paths.
struct DenseState {
    int sites = 0;
    std::vector<double> amplitudes;  // index bit (L-1-l) holds site l; site 0 is the MSB
};

inline constexpr int kMaxDenseSites = 16;

DenseState build_dense_state(const ModelParams& params, std::span<const double> x_tilde);

// amplitudes[0]^2 / |amplitudes|^2 — the squared overlap with |0...0>.
double dense_score(const DenseState& state);

// Exact reduced density matrix of the normalized state over 1 or 2 kept
// sites (0-based, ascending order for pairs).
ReducedDensityMatrix dense_partial_trace(const DenseState& state, std::span<const int> keep);

}  // namespace smtad::oracle
