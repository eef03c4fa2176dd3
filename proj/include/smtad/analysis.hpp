#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smtad/model.hpp"

namespace smtad {

// Reduced density matrix of the normalized output state: 2x2 (single site)
// or 4x4 (site pair, lower site index is the slow tensor index). Row-major,
// symmetric, trace 1.
struct ReducedDensityMatrix {
    int dim = 0;
    std::vector<double> entries;  // dim * dim, row-major

    double at(int r, int c) const { return entries[static_cast<std::size_t>(r) * dim + c]; }
    double& at(int r, int c) { return entries[static_cast<std::size_t>(r) * dim + c]; }
    double trace() const;
    // Ascending eigenvalues of the symmetric matrix.
    std::vector<double> eigenvalues() const;
};

// Dataset-averaged single-site entanglement entropies for one cohort, nats.
struct EntropyProfile {
    std::vector<double> site_entropy;  // length L, in [0, ln 2]
    std::size_t sample_count = 0;
    std::string cohort;
};

// Dataset-averaged pairwise mutual information, nats. Symmetric, zero
// diagonal by convention.
struct MIMatrix {
    int sites = 0;
    std::vector<double> entries;  // L * L row-major

    double at(int k, int l) const { return entries[static_cast<std::size_t>(k) * sites + l]; }
    double& at(int k, int l) { return entries[static_cast<std::size_t>(k) * sites + l]; }
};

struct CohortReport {
    EntropyProfile entropy_normal;
    EntropyProfile entropy_anomalous;
    MIMatrix mi_normal;
    MIMatrix mi_anomalous;
    std::vector<double> amplification;  // S_anom / max(S_norm, s_floor) per site
};

inline constexpr double kEntropyFloor = 1e-12;  // s_floor in the amplification ratio

// rho_l = Tr_{\l} |Phi><Phi| for the normalized output state. Sites 0-based.
ReducedDensityMatrix single_site_rdm(const ModelParams& params, std::span<const double> x_tilde,
                                     int l);

// rho_{k,l} with k != l; tensor order puts min(k, l) as the slow index.
ReducedDensityMatrix two_site_rdm(const ModelParams& params, std::span<const double> x_tilde,
                                  int k, int l);

// -sum lambda ln lambda over eigenvalues clamped to [0, 1]; 0 ln 0 := 0.
double von_neumann_entropy(const ReducedDensityMatrix& rho);

// I_{k,l} = S_k + S_l - S_{k,l}, clamped below at 0.
double mutual_information(const ModelParams& params, std::span<const double> x_tilde, int k, int l);

// All single-site entropies plus the full MI matrix for one sample, via
// prefix/suffix overlap caches (O(L^2 M^2 P^2) total).
struct SampleEntanglement {
    std::vector<double> site_entropy;
    MIMatrix mi;
};
SampleEntanglement sample_entanglement(const ModelParams& params, std::span<const double> x_tilde);

// Cohort-averaged profiles and the per-site entropy amplification ratio.
// Rows are length-L samples, row-major.
CohortReport cohort_profiles(const ModelParams& params, std::span<const double> normal_rows,
                             std::size_t n_normal, std::span<const double> anomalous_rows,
                             std::size_t n_anomalous, int n_threads = 0);

// Sites whose amplification meets the threshold, reported as ascending
// 1-based indices (the convention used in exports and selection files).
std::vector<int> select_features(std::span<const double> amplification, double threshold);

}  // namespace smtad
