#include "smtad/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smtad/threads.hpp"

namespace smtad {

namespace {

// Component site vectors (cos phi, sin phi) for one sample, plus the pair
// machinery every reduced-density computation shares.
struct SiteVectors {
    int sites = 0;
    int n_comp = 0;
    std::vector<double> c, s;  // [k * sites + l]

    SiteVectors(const ModelParams& params, std::span<const double> x) {
        if (static_cast<int>(x.size()) != params.sites)
            throw std::domain_error("analysis: sample length does not match site count");
        sites = params.sites;
        n_comp = params.components();
        c.resize(static_cast<std::size_t>(n_comp) * sites);
        s.resize(c.size());
        for (int k = 0; k < n_comp; ++k) {
            const double omega = params.component_frequency(k);
            for (int l = 0; l < sites; ++l) {
                const double phi = params.theta[static_cast<std::size_t>(k) * sites + l] + omega * x[l];
                c[static_cast<std::size_t>(k) * sites + l] = std::cos(phi);
                s[static_cast<std::size_t>(k) * sites + l] = std::sin(phi);
            }
        }
    }

    // cos(psi_{k,k2,l}) = v_k,l . v_k2,l
    double pair_cos(int k, int k2, int l) const {
        const std::size_t a = static_cast<std::size_t>(k) * sites + l;
        const std::size_t b = static_cast<std::size_t>(k2) * sites + l;
        return c[a] * c[b] + s[a] * s[b];
    }
};

// pre[i] = prod_{l<i} d_l, suf[i] = prod_{l>=i} d_l; exclusion and gap
// products fall out without any division.
void prefix_suffix(std::span<const double> d, std::vector<double>& pre, std::vector<double>& suf) {
    const std::size_t n = d.size();
    pre.resize(n + 1);
    suf.resize(n + 1);
    pre[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * d[i];
    suf[n] = 1.0;
    for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] * d[i];
}

double gram_direct(const SiteVectors& v, const ModelParams& params) {
    double z = 0.0;
    for (int k = 0; k < v.n_comp; ++k) {
        z += params.coeff[k] * params.coeff[k];
        for (int k2 = k + 1; k2 < v.n_comp; ++k2) {
            double w = 1.0;
            for (int l = 0; l < v.sites; ++l) w *= v.pair_cos(k, k2, l);
            z += 2.0 * params.coeff[k] * params.coeff[k2] * w;
        }
    }
    return z;
}

void check_z(double z) {
    if (!(z > kZFloor))
        throw degenerate_state_error("analysis: normalization constant collapsed");
}

void symmetrize(ReducedDensityMatrix& rho) {
    for (int r = 0; r < rho.dim; ++r)
        for (int c = r + 1; c < rho.dim; ++c) {
            const double m = 0.5 * (rho.at(r, c) + rho.at(c, r));
            rho.at(r, c) = m;
            rho.at(c, r) = m;
        }
}

}  // namespace

double ReducedDensityMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < dim; ++i) t += at(i, i);
    return t;
}

std::vector<double> ReducedDensityMatrix::eigenvalues() const {
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = at(r, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    std::vector<double> out(dim);
    for (int i = 0; i < dim; ++i) out[i] = solver.eigenvalues()[i];
    return out;
}

ReducedDensityMatrix single_site_rdm(const ModelParams& params, std::span<const double> x_tilde,
                                     int l) {
    if (l < 0 || l >= params.sites) throw std::domain_error("single_site_rdm: site out of range");
    const SiteVectors v(params, x_tilde);
    const double z = gram_direct(v, params);
    check_z(z);

    ReducedDensityMatrix rho;
    rho.dim = 2;
    rho.entries.assign(4, 0.0);
    std::vector<double> d(v.sites);
    std::vector<double> pre, suf;
    for (int k = 0; k < v.n_comp; ++k) {
        for (int k2 = k; k2 < v.n_comp; ++k2) {
            for (int i = 0; i < v.sites; ++i) d[i] = v.pair_cos(k, k2, i);
            prefix_suffix(d, pre, suf);
            const double w = params.coeff[k] * params.coeff[k2] * pre[l] * suf[l + 1];
            const double* ck = &v.c[static_cast<std::size_t>(k) * v.sites];
            const double* sk = &v.s[static_cast<std::size_t>(k) * v.sites];
            const double* ck2 = &v.c[static_cast<std::size_t>(k2) * v.sites];
            const double* sk2 = &v.s[static_cast<std::size_t>(k2) * v.sites];
            const double a[2] = {ck[l], sk[l]};
            const double b[2] = {ck2[l], sk2[l]};
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    double outer = a[r] * b[c];
                    if (k != k2) outer += b[r] * a[c];
                    rho.at(r, c) += w * outer;
                }
        }
    }
    for (double& e : rho.entries) e /= z;
    symmetrize(rho);
    return rho;
}

ReducedDensityMatrix two_site_rdm(const ModelParams& params, std::span<const double> x_tilde,
                                  int k_site, int l_site) {
    if (k_site == l_site) throw std::domain_error("two_site_rdm: sites must be distinct");
    if (k_site < 0 || k_site >= params.sites || l_site < 0 || l_site >= params.sites)
        throw std::domain_error("two_site_rdm: site out of range");
    const int a_site = std::min(k_site, l_site);
    const int b_site = std::max(k_site, l_site);

    const SiteVectors v(params, x_tilde);
    const double z = gram_direct(v, params);
    check_z(z);

    ReducedDensityMatrix rho;
    rho.dim = 4;
    rho.entries.assign(16, 0.0);
    std::vector<double> d(v.sites);
    std::vector<double> pre, suf;
    for (int k = 0; k < v.n_comp; ++k) {
        for (int k2 = k; k2 < v.n_comp; ++k2) {
            for (int i = 0; i < v.sites; ++i) d[i] = v.pair_cos(k, k2, i);
            prefix_suffix(d, pre, suf);
            double gap = 1.0;
            for (int i = a_site + 1; i < b_site; ++i) gap *= d[i];
            const double w = params.coeff[k] * params.coeff[k2] * pre[a_site] * gap * suf[b_site + 1];
            // pair-space vectors, slow index = lower site
            const std::size_t ka = static_cast<std::size_t>(k) * v.sites;
            const std::size_t k2a = static_cast<std::size_t>(k2) * v.sites;
            const double ua[2] = {v.c[ka + a_site], v.s[ka + a_site]};
            const double ub[2] = {v.c[ka + b_site], v.s[ka + b_site]};
            const double wa[2] = {v.c[k2a + a_site], v.s[k2a + a_site]};
            const double wb[2] = {v.c[k2a + b_site], v.s[k2a + b_site]};
            double u[4], t[4];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    u[2 * i + j] = ua[i] * ub[j];
                    t[2 * i + j] = wa[i] * wb[j];
                }
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) {
                    double outer = u[r] * t[c];
                    if (k != k2) outer += t[r] * u[c];
                    rho.at(r, c) += w * outer;
                }
        }
    }
    for (double& e : rho.entries) e /= z;
    symmetrize(rho);
    return rho;
}

double von_neumann_entropy(const ReducedDensityMatrix& rho) {
    double entropy = 0.0;
    for (double lambda : rho.eigenvalues()) {
        lambda = std::clamp(lambda, 0.0, 1.0);
        if (lambda > 0.0) entropy -= lambda * std::log(lambda);
    }
    return entropy;
}

double mutual_information(const ModelParams& params, std::span<const double> x_tilde, int k,
                          int l) {
    if (k == l) throw std::domain_error("mutual_information: sites must be distinct");
    const double sk = von_neumann_entropy(single_site_rdm(params, x_tilde, k));
    const double sl = von_neumann_entropy(single_site_rdm(params, x_tilde, l));
    const double skl = von_neumann_entropy(two_site_rdm(params, x_tilde, k, l));
    return std::max(sk + sl - skl, 0.0);
}

SampleEntanglement sample_entanglement(const ModelParams& params, std::span<const double> x_tilde) {
    const SiteVectors v(params, x_tilde);
    const double z = gram_direct(v, params);
    check_z(z);
    const int sites = v.sites;

    // Accumulate every single-site 2x2 and every pair 4x4 in one sweep over
    // component pairs, reusing the prefix/suffix caches per pair.
    std::vector<double> rho1(static_cast<std::size_t>(sites) * 4, 0.0);
    const std::size_t n_pairs = static_cast<std::size_t>(sites) * (sites - 1) / 2;
    std::vector<double> rho2(n_pairs * 16, 0.0);
    auto pair_index = [sites](int a, int b) {
        // a < b
        return static_cast<std::size_t>(a) * (2 * sites - a - 1) / 2 + (b - a - 1);
    };

    std::vector<double> d(sites);
    std::vector<double> pre, suf;
    for (int k = 0; k < v.n_comp; ++k) {
        const std::size_t ka = static_cast<std::size_t>(k) * sites;
        for (int k2 = k; k2 < v.n_comp; ++k2) {
            const std::size_t k2a = static_cast<std::size_t>(k2) * sites;
            for (int i = 0; i < sites; ++i) d[i] = v.pair_cos(k, k2, i);
            prefix_suffix(d, pre, suf);
            const double cc = params.coeff[k] * params.coeff[k2];
            const bool cross = k != k2;

            for (int l = 0; l < sites; ++l) {
                const double w = cc * pre[l] * suf[l + 1];
                const double a[2] = {v.c[ka + l], v.s[ka + l]};
                const double b[2] = {v.c[k2a + l], v.s[k2a + l]};
                double* out = &rho1[static_cast<std::size_t>(l) * 4];
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c) {
                        double outer = a[r] * b[c];
                        if (cross) outer += b[r] * a[c];
                        out[r * 2 + c] += w * outer;
                    }
            }

            for (int a_site = 0; a_site < sites; ++a_site) {
                const double ua[2] = {v.c[ka + a_site], v.s[ka + a_site]};
                const double wa[2] = {v.c[k2a + a_site], v.s[k2a + a_site]};
                double gap = 1.0;
                for (int b_site = a_site + 1; b_site < sites; ++b_site) {
                    const double w = cc * pre[a_site] * gap * suf[b_site + 1];
                    const double ub[2] = {v.c[ka + b_site], v.s[ka + b_site]};
                    const double wb[2] = {v.c[k2a + b_site], v.s[k2a + b_site]};
                    double u[4], t[4];
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) {
                            u[2 * i + j] = ua[i] * ub[j];
                            t[2 * i + j] = wa[i] * wb[j];
                        }
                    double* out = &rho2[pair_index(a_site, b_site) * 16];
                    for (int r = 0; r < 4; ++r)
                        for (int c = 0; c < 4; ++c) {
                            double outer = u[r] * t[c];
                            if (cross) outer += t[r] * u[c];
                            out[r * 4 + c] += w * outer;
                        }
                    gap *= d[b_site];
                }
            }
        }
    }

    SampleEntanglement result;
    result.site_entropy.resize(sites);
    result.mi.sites = sites;
    result.mi.entries.assign(static_cast<std::size_t>(sites) * sites, 0.0);

    std::vector<double> s1(sites);
    for (int l = 0; l < sites; ++l) {
        ReducedDensityMatrix rho;
        rho.dim = 2;
        rho.entries.assign(rho1.begin() + static_cast<std::ptrdiff_t>(l) * 4,
                           rho1.begin() + static_cast<std::ptrdiff_t>(l) * 4 + 4);
        for (double& e : rho.entries) e /= z;
        symmetrize(rho);
        s1[l] = von_neumann_entropy(rho);
        result.site_entropy[l] = s1[l];
    }
    for (int a = 0; a < sites; ++a) {
        for (int b = a + 1; b < sites; ++b) {
            ReducedDensityMatrix rho;
            rho.dim = 4;
            const std::size_t off = pair_index(a, b) * 16;
            rho.entries.assign(rho2.begin() + static_cast<std::ptrdiff_t>(off),
                               rho2.begin() + static_cast<std::ptrdiff_t>(off) + 16);
            for (double& e : rho.entries) e /= z;
            symmetrize(rho);
            const double mi = std::max(s1[a] + s1[b] - von_neumann_entropy(rho), 0.0);
            result.mi.at(a, b) = mi;
            result.mi.at(b, a) = mi;
        }
    }
    return result;
}

CohortReport cohort_profiles(const ModelParams& params, std::span<const double> normal_rows,
                             std::size_t n_normal, std::span<const double> anomalous_rows,
                             std::size_t n_anomalous, int n_threads) {
    if (n_normal == 0 || n_anomalous == 0)
        throw std::domain_error("cohort_profiles: both cohorts must be non-empty");
    const int sites = params.sites;

    auto average = [&](std::span<const double> rows, std::size_t n, const char* tag,
                       EntropyProfile& profile, MIMatrix& mi) {
        std::vector<SampleEntanglement> per_sample(n);
        parallel_for(n, n_threads, [&](std::size_t i) {
            per_sample[i] = sample_entanglement(
                params, rows.subspan(i * static_cast<std::size_t>(sites), sites));
        });
        profile.cohort = tag;
        profile.sample_count = n;
        profile.site_entropy.assign(sites, 0.0);
        mi.sites = sites;
        mi.entries.assign(static_cast<std::size_t>(sites) * sites, 0.0);
        for (const auto& s : per_sample) {
            for (int l = 0; l < sites; ++l) profile.site_entropy[l] += s.site_entropy[l];
            for (std::size_t e = 0; e < mi.entries.size(); ++e) mi.entries[e] += s.mi.entries[e];
        }
        for (double& e : profile.site_entropy) e /= static_cast<double>(n);
        for (double& e : mi.entries) e /= static_cast<double>(n);
    };

    CohortReport report;
    average(normal_rows, n_normal, "normal", report.entropy_normal, report.mi_normal);
    average(anomalous_rows, n_anomalous, "anomalous", report.entropy_anomalous, report.mi_anomalous);
    report.amplification.resize(sites);
    for (int l = 0; l < sites; ++l) {
        const double s_anom = report.entropy_anomalous.site_entropy[l];
        // zero numerator wins: entropies at roundoff level report no signal
        report.amplification[l] =
            s_anom <= kEntropyFloor
                ? 0.0
                : s_anom / std::max(report.entropy_normal.site_entropy[l], kEntropyFloor);
    }
    return report;
}

std::vector<int> select_features(std::span<const double> amplification, double threshold) {
    if (!(threshold > 0.0)) throw std::domain_error("select_features: threshold must be positive");
    std::vector<int> selected;
    for (std::size_t l = 0; l < amplification.size(); ++l)
        if (amplification[l] >= threshold) selected.push_back(static_cast<int>(l) + 1);
    if (selected.empty())
        throw std::runtime_error(
            "select_features: no feature meets the amplification threshold; lower it");
    return selected;
}

}  // namespace smtad
