#include "smtad/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "smtad/rng.hpp"
#include "smtad/threads.hpp"

namespace smtad {

namespace {

constexpr double kEpochBudget = 15000.0;  // heuristic constant in T_epoch = floor(15000 |B| / |T|)
constexpr std::size_t kAutoBatchCutover = 10000;
constexpr int kGradChunks = 8;  // fixed chunk count keeps reductions thread-count independent

// Direct-domain magnitudes outside this band get the signed-log fallback.
constexpr double kFastPathFloor = 1e-290;
constexpr double kFastPathCeil = 1e290;

bool fast_path_ok(double n_val, double z_val) {
    if (!std::isfinite(n_val) || !std::isfinite(z_val)) return false;
    if (z_val < kFastPathFloor || z_val > kFastPathCeil) return false;
    if (n_val != 0.0 && std::fabs(n_val) < kFastPathFloor) return false;
    if (n_val == 0.0) return false;  // exact zero: let the stable path decide floor vs degenerate
    return true;
}

double regularizer(const ModelParams& params, double lambda_c, double lambda_theta) {
    double c2 = 0.0, t2 = 0.0;
    for (double c : params.coeff) c2 += c * c;
    for (double t : params.theta) t2 += t * t;
    return lambda_c * c2 + lambda_theta * t2;
}

}  // namespace

int TrainConfig::resolve_batch_size(std::size_t n_train) const {
    if (batch_size > 0) return batch_size;
    return n_train < kAutoBatchCutover ? 64 : 512;
}

long TrainConfig::resolve_epochs(std::size_t n_train) const {
    if (epochs > 0) return epochs;
    if (n_train == 0) return 1;
    const long t = static_cast<long>(
        std::floor(kEpochBudget * resolve_batch_size(n_train) / static_cast<double>(n_train)));
    return std::max(t, 1L);
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::domain_error("TrainConfig: learning rate must be positive");
    if (batch_size < 0) throw std::domain_error("TrainConfig: negative batch size");
    if (epochs < 0) throw std::domain_error("TrainConfig: negative epoch count");
    if (lambda_c < 0.0 || lambda_theta < 0.0)
        throw std::domain_error("TrainConfig: regularization weights must be non-negative");
    if (!(beta1 >= 0.0) || beta1 >= 1.0 || !(beta2 >= 0.0) || beta2 >= 1.0)
        throw std::domain_error("TrainConfig: adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw std::domain_error("TrainConfig: adam epsilon must be positive");
}

Gradient Gradient::zeros_like(const ModelParams& params) {
    Gradient g;
    g.theta.assign(params.theta.size(), 0.0);
    g.coeff.assign(params.coeff.size(), 0.0);
    return g;
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
    OptimizerState s;
    s.m_theta.assign(params.theta.size(), 0.0);
    s.v_theta.assign(params.theta.size(), 0.0);
    s.m_coeff.assign(params.coeff.size(), 0.0);
    s.v_coeff.assign(params.coeff.size(), 0.0);
    return s;
}

LossReport loss(const ModelParams& params, std::span<const double> batch_rows, std::size_t n_rows,
                double lambda_c, double lambda_theta) {
    if (n_rows == 0) throw std::domain_error("loss: empty batch");
    const std::size_t cols = params.sites;
    if (batch_rows.size() != n_rows * cols) throw std::domain_error("loss: batch buffer size mismatch");
    double sum_log_score = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r)
        sum_log_score += normality_score(params, batch_rows.subspan(r * cols, cols)).log_score;
    LossReport report;
    report.mean_log_score = sum_log_score / static_cast<double>(n_rows);
    report.nll = -report.mean_log_score;
    report.reg = regularizer(params, lambda_c, lambda_theta);
    report.total = report.nll + report.reg;
    return report;
}

namespace {

// Signed-log prefix/suffix over one factor sequence: pre[i] covers indices
// < i, suf[i] covers indices >= i.
struct LogPrefixSuffix {
    std::vector<int> pre_sign, suf_sign;
    std::vector<double> pre_log, suf_log;

    void build(std::span<const double> factors) {
        const std::size_t n = factors.size();
        pre_sign.assign(n + 1, 1);
        suf_sign.assign(n + 1, 1);
        pre_log.assign(n + 1, 0.0);
        suf_log.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double f = factors[i];
            if (f == 0.0 || pre_sign[i] == 0) {
                pre_sign[i + 1] = 0;
                pre_log[i + 1] = 0.0;
            } else {
                pre_sign[i + 1] = f < 0.0 ? -pre_sign[i] : pre_sign[i];
                pre_log[i + 1] = pre_log[i] + std::log(std::fabs(f));
            }
        }
        for (std::size_t i = n; i-- > 0;) {
            const double f = factors[i];
            if (f == 0.0 || suf_sign[i + 1] == 0) {
                suf_sign[i] = 0;
                suf_log[i] = 0.0;
            } else {
                suf_sign[i] = f < 0.0 ? -suf_sign[i + 1] : suf_sign[i + 1];
                suf_log[i] = suf_log[i + 1] + std::log(std::fabs(f));
            }
        }
    }

    // product over all indices except i
    SignedLogProduct exclude(std::size_t i) const {
        SignedLogProduct p;
        p.sign = pre_sign[i] * suf_sign[i + 1];
        p.log_magnitude = p.sign == 0 ? 0.0 : pre_log[i] + suf_log[i + 1];
        return p;
    }

    SignedLogProduct full() const {
        SignedLogProduct p;
        p.sign = pre_sign.back();
        p.log_magnitude = p.sign == 0 ? 0.0 : pre_log.back();
        return p;
    }
};

// Stable per-sample loss value and gradient of the data term (no
// regularizer), accumulated into `g_theta`/`g_coeff`. Signed-log throughout,
// so it survives any parameter scale the direct path cannot.
double stable_sample_gradient(const ModelParams& params, std::span<const double> x,
                              std::span<double> g_theta, std::span<double> g_coeff) {
    const int sites = params.sites;
    const int n_comp = params.components();

    std::vector<double> cphi(static_cast<std::size_t>(n_comp) * sites);
    std::vector<double> sphi(cphi.size());
    for (int k = 0; k < n_comp; ++k) {
        const double omega = params.component_frequency(k);
        for (int l = 0; l < sites; ++l) {
            const double phi = params.theta[static_cast<std::size_t>(k) * sites + l] + omega * x[l];
            cphi[static_cast<std::size_t>(k) * sites + l] = std::cos(phi);
            sphi[static_cast<std::size_t>(k) * sites + l] = std::sin(phi);
        }
    }

    // numerator pieces
    std::vector<LogPrefixSuffix> comp_ps(n_comp);
    std::vector<SignedLogProduct> n_terms(n_comp);
    for (int k = 0; k < n_comp; ++k) {
        comp_ps[k].build({cphi.data() + static_cast<std::size_t>(k) * sites, static_cast<std::size_t>(sites)});
        SignedLogProduct t = comp_ps[k].full();
        t.multiply(params.coeff[k]);
        n_terms[k] = t;
    }
    const detail::LogSum n_sum = detail::signed_log_sum(n_terms);

    // Z pieces; keep each pair's prefix/suffix for the gradient pass
    const int n_pairs = n_comp * (n_comp - 1) / 2;
    std::vector<LogPrefixSuffix> pair_ps(n_pairs);
    std::vector<double> pair_cos(sites), pair_sin(sites);
    std::vector<SignedLogProduct> z_terms;
    z_terms.reserve(static_cast<std::size_t>(n_pairs) + n_comp);
    std::vector<std::pair<int, int>> pair_ids;
    pair_ids.reserve(n_pairs);
    for (int k = 0; k < n_comp; ++k)
        z_terms.push_back(SignedLogProduct::of(params.coeff[k] * params.coeff[k]));
    int pair_at = 0;
    for (int k = 0; k < n_comp; ++k) {
        for (int k2 = k + 1; k2 < n_comp; ++k2, ++pair_at) {
            for (int l = 0; l < sites; ++l) {
                const std::size_t a = static_cast<std::size_t>(k) * sites + l;
                const std::size_t b = static_cast<std::size_t>(k2) * sites + l;
                pair_cos[l] = cphi[a] * cphi[b] + sphi[a] * sphi[b];
            }
            pair_ps[pair_at].build(pair_cos);
            SignedLogProduct t = pair_ps[pair_at].full();
            t.multiply(2.0 * params.coeff[k] * params.coeff[k2]);
            z_terms.push_back(t);
            pair_ids.emplace_back(k, k2);
        }
    }
    detail::LogSum z_sum = detail::signed_log_sum(z_terms);
    if (z_sum.sign < 0) z_sum = detail::LogSum{};
    if (z_sum.sign == 0 || !(z_sum.value() > kZFloor))
        throw degenerate_state_error("gradient: normalization constant collapsed");
    const double log_z = z_sum.log_abs;

    double log_score = n_sum.sign == 0 ? -std::numeric_limits<double>::infinity()
                                       : 2.0 * n_sum.log_abs - log_z;
    if (!(log_score > kLogScoreFloor)) return -kLogScoreFloor;  // floored: flat, zero gradient
    log_score = std::min(log_score, 0.0);

    // numerator part: -2 (dN/du) / N
    const double log_n = n_sum.log_abs;
    for (int k = 0; k < n_comp; ++k) {
        const SignedLogProduct full = comp_ps[k].full();
        if (full.sign != 0)
            g_coeff[k] -= 2.0 * full.sign * n_sum.sign * std::exp(full.log_magnitude - log_n);
        const double c_k = params.coeff[k];
        if (c_k == 0.0) continue;
        const double log_ck = std::log(std::fabs(c_k));
        const int sign_ck = c_k < 0.0 ? -1 : 1;
        for (int l = 0; l < sites; ++l) {
            const double sin_l = sphi[static_cast<std::size_t>(k) * sites + l];
            if (sin_l == 0.0) continue;
            const SignedLogProduct excl = comp_ps[k].exclude(l);
            if (excl.sign == 0) continue;
            const int sign = sign_ck * (sin_l < 0.0 ? -1 : 1) * excl.sign * n_sum.sign;
            const double mag =
                std::exp(log_ck + std::log(std::fabs(sin_l)) + excl.log_magnitude - log_n);
            // -2 * c * (-sin) * excl / N
            g_theta[static_cast<std::size_t>(k) * sites + l] += 2.0 * sign * mag;
        }
    }

    // Z part: (dZ/du) / Z
    for (int k = 0; k < n_comp; ++k) {
        const double c_k = params.coeff[k];
        if (c_k != 0.0)
            g_coeff[k] += 2.0 * (c_k < 0.0 ? -1.0 : 1.0) * std::exp(std::log(std::fabs(c_k)) - log_z);
    }
    for (int p = 0; p < static_cast<int>(pair_ids.size()); ++p) {
        const auto [k, k2] = pair_ids[p];
        const double c_k = params.coeff[k], c_k2 = params.coeff[k2];
        const SignedLogProduct w = pair_ps[p].full();
        if (w.sign != 0) {
            if (c_k2 != 0.0)
                g_coeff[k] += 2.0 * w.sign * (c_k2 < 0.0 ? -1.0 : 1.0) *
                              std::exp(std::log(std::fabs(c_k2)) + w.log_magnitude - log_z);
            if (c_k != 0.0)
                g_coeff[k2] += 2.0 * w.sign * (c_k < 0.0 ? -1.0 : 1.0) *
                               std::exp(std::log(std::fabs(c_k)) + w.log_magnitude - log_z);
        }
        const double cc = 2.0 * c_k * c_k2;
        if (cc == 0.0) continue;
        const double log_cc = std::log(std::fabs(cc));
        const int sign_cc = cc < 0.0 ? -1 : 1;
        for (int l = 0; l < sites; ++l) {
            const std::size_t a = static_cast<std::size_t>(k) * sites + l;
            const std::size_t b = static_cast<std::size_t>(k2) * sites + l;
            const double sin_l = sphi[a] * cphi[b] - cphi[a] * sphi[b];
            if (sin_l == 0.0) continue;
            const SignedLogProduct excl = pair_ps[p].exclude(l);
            if (excl.sign == 0) continue;
            const int sign = sign_cc * (sin_l < 0.0 ? -1 : 1) * excl.sign;
            const double mag =
                std::exp(log_cc + std::log(std::fabs(sin_l)) + excl.log_magnitude - log_z);
            // dZ/dtheta_k = -cc sin excl; dZ/dtheta_k2 flips sign
            g_theta[static_cast<std::size_t>(k) * sites + l] -= sign * mag;
            g_theta[static_cast<std::size_t>(k2) * sites + l] += sign * mag;
        }
    }
    return std::max(-log_score, 0.0);
}

}  // namespace

Gradient gradient(const ModelParams& params, std::span<const double> batch_rows,
                  std::size_t n_rows, double lambda_c, double lambda_theta) {
    if (n_rows == 0) throw std::domain_error("gradient: empty batch");
    const std::size_t cols = params.sites;
    if (batch_rows.size() != n_rows * cols)
        throw std::domain_error("gradient: batch buffer size mismatch");

    Gradient sum = Gradient::zeros_like(params);
    Gradient per_sample = Gradient::zeros_like(params);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::fill(per_sample.theta.begin(), per_sample.theta.end(), 0.0);
        std::fill(per_sample.coeff.begin(), per_sample.coeff.end(), 0.0);
        stable_sample_gradient(params, batch_rows.subspan(r * cols, cols), per_sample.theta,
                               per_sample.coeff);
        for (std::size_t i = 0; i < sum.theta.size(); ++i) sum.theta[i] += per_sample.theta[i];
        for (std::size_t i = 0; i < sum.coeff.size(); ++i) sum.coeff[i] += per_sample.coeff[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n_rows);
    for (std::size_t i = 0; i < sum.theta.size(); ++i)
        sum.theta[i] = sum.theta[i] * inv_n + 2.0 * lambda_theta * params.theta[i];
    for (std::size_t i = 0; i < sum.coeff.size(); ++i)
        sum.coeff[i] = sum.coeff[i] * inv_n + 2.0 * lambda_c * params.coeff[i];
    return sum;
}

void adam_step(ModelParams& params, const Gradient& grad, OptimizerState& state,
               const TrainConfig& config) {
    if (grad.theta.size() != params.theta.size() || grad.coeff.size() != params.coeff.size())
        throw std::domain_error("adam_step: gradient shape mismatch");
    for (double g : grad.theta)
        if (!std::isfinite(g)) throw numerical_error("adam_step: non-finite theta gradient");
    for (double g : grad.coeff)
        if (!std::isfinite(g)) throw numerical_error("adam_step: non-finite coeff gradient");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    };
    update(params.theta, grad.theta, state.m_theta, state.v_theta);
    update(params.coeff, grad.coeff, state.m_coeff, state.v_coeff);
}

namespace detail {

namespace {

// Fused batch kernel.
//
// The cross-pair part of the gradient dominates training cost. Two
// structural facts keep it fast: for a resolution block (p, p') the
// sample rotation cos/sin((omega_p - omega_p') x_l) is shared by all M^2
// component pairs, and the per-pair angle differences theta_k - theta_k2
// have no sample dependence at all. The inner loops therefore run on small
// L1-resident tables, eight samples at a time, with fixed summation order
// so results do not depend on the thread count.
constexpr std::size_t kLanes = 8;

struct BatchWorkspace {
    int n_comp = 0, sites = 0, res = 0;
    std::size_t dataset_rows = 0;
    const double* dataset = nullptr;

    // per-run trig tables, sample-major
    std::vector<double> emb_c, emb_s;    // [sample][p][l]
    std::vector<double> pu_c, pu_s;      // [sample][pb][l], pb enumerates p < p'
    std::vector<std::pair<int, int>> pb_list;            // (p, p') 0-based
    std::vector<std::array<int, 3>> cross_pairs;          // (k, k2, pb)

    // per-step
    std::vector<double> rc, rs;  // theta trig: k * L + l
    std::vector<double> sd_c;      // same-p c-grad: k
    std::vector<double> td_theta;  // same-p theta-grad: k * L
    double dz_same = 0.0;

    // per-batch, lane-padded (stride NB8)
    std::size_t batch = 0, nb8 = 0;
    std::vector<double> ec, es;  // [p][l][NB8]
    std::vector<double> uc, us;  // [pb][l][NB8]
    std::vector<double> gk;      // component products: [k][NB8]
    std::vector<double> n_val, z_val, inv_n, inv_z, sample_loss;
    std::vector<double> sxc;     // combined cross c-grad partials: [k][NB8]
    std::vector<double> batch_rows;  // raw rows for the stable fallback
    std::vector<std::uint8_t> needs_fallback;

    struct Chunk {
        std::vector<double> pre;    // (L + 1) * kLanes
        std::vector<double> cp, sp; // L * kLanes
        std::vector<double> tacc;   // L * kLanes
        std::vector<double> n_part;     // NB8
        std::vector<double> z_part;     // NB8
        std::vector<double> sxc_part;   // K * NB8
        std::vector<double> g_theta;    // K * L
        std::vector<double> g_coeff;    // K
        std::vector<double> dc, ds;     // per-pair angle-difference trig: L
    };
    std::vector<Chunk> chunks;

    void set_shape(const ModelParams& params) {
        if (n_comp == params.components() && sites == params.sites && res == params.resolutions)
            return;
        n_comp = params.components();
        sites = params.sites;
        res = params.resolutions;
        rc.resize(static_cast<std::size_t>(n_comp) * sites);
        rs.resize(rc.size());
        sd_c.resize(n_comp);
        td_theta.resize(rc.size());

        pb_list.clear();
        for (int p = 0; p < res; ++p)
            for (int p2 = p + 1; p2 < res; ++p2) pb_list.emplace_back(p, p2);
        cross_pairs.clear();
        for (std::size_t pb = 0; pb < pb_list.size(); ++pb) {
            const auto [p, p2] = pb_list[pb];
            for (int m = 0; m < n_comp / res; ++m)
                for (int m2 = 0; m2 < n_comp / res; ++m2)
                    cross_pairs.push_back({m * res + p, m2 * res + p2, static_cast<int>(pb)});
        }
        dataset = nullptr;  // force table rebuild
    }

    // per-run trig over the full training set
    void set_dataset(const double* rows, std::size_t n) {
        if (dataset == rows && dataset_rows == n) return;
        dataset = rows;
        dataset_rows = n;
        const std::size_t pl = static_cast<std::size_t>(res) * sites;
        emb_c.resize(n * pl);
        emb_s.resize(n * pl);
        for (std::size_t r = 0; r < n; ++r)
            for (int p = 0; p < res; ++p) {
                const double omega = site_frequency(p + 1);
                for (int l = 0; l < sites; ++l) {
                    const double a = omega * rows[r * sites + l];
                    emb_c[r * pl + static_cast<std::size_t>(p) * sites + l] = std::cos(a);
                    emb_s[r * pl + static_cast<std::size_t>(p) * sites + l] = std::sin(a);
                }
            }
        const std::size_t bl = pb_list.size() * sites;
        pu_c.resize(n * bl);
        pu_s.resize(n * bl);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t pb = 0; pb < pb_list.size(); ++pb) {
                const auto [p, p2] = pb_list[pb];
                const double domega = site_frequency(p + 1) - site_frequency(p2 + 1);
                for (int l = 0; l < sites; ++l) {
                    const double a = domega * rows[r * sites + l];
                    pu_c[r * bl + pb * sites + l] = std::cos(a);
                    pu_s[r * bl + pb * sites + l] = std::sin(a);
                }
            }
    }

    // lane-padded batch gather; padded lanes get the x = 0 embedding and a
    // zero weight so they never contribute to a reduction
    void gather_batch(std::span<const std::size_t> idx) {
        batch = idx.size();
        nb8 = (batch + kLanes - 1) / kLanes * kLanes;
        const std::size_t pl = static_cast<std::size_t>(res) * sites;
        const std::size_t bl = pb_list.size() * sites;
        ec.assign(pl * nb8, 1.0);
        es.assign(pl * nb8, 0.0);
        uc.assign(bl * nb8, 1.0);
        us.assign(bl * nb8, 0.0);
        for (std::size_t j = 0; j < batch; ++j) {
            const std::size_t r = idx[j];
            for (std::size_t e = 0; e < pl; ++e) {
                ec[e * nb8 + j] = emb_c[r * pl + e];
                es[e * nb8 + j] = emb_s[r * pl + e];
            }
            for (std::size_t e = 0; e < bl; ++e) {
                uc[e * nb8 + j] = pu_c[r * bl + e];
                us[e * nb8 + j] = pu_s[r * bl + e];
            }
        }
        batch_rows.resize(batch * static_cast<std::size_t>(sites));
        for (std::size_t j = 0; j < batch; ++j)
            std::memcpy(&batch_rows[j * sites], dataset + idx[j] * sites, sizeof(double) * sites);

        gk.assign(static_cast<std::size_t>(n_comp) * nb8, 0.0);
        n_val.assign(nb8, 0.0);
        z_val.assign(nb8, 0.0);
        inv_n.assign(nb8, 0.0);
        inv_z.assign(nb8, 0.0);
        sample_loss.assign(nb8, 0.0);
        sxc.assign(static_cast<std::size_t>(n_comp) * nb8, 0.0);
        needs_fallback.assign(nb8, 0);

        chunks.resize(kGradChunks);
        for (auto& ch : chunks) {
            ch.pre.resize(static_cast<std::size_t>(sites + 1) * kLanes);
            ch.cp.resize(static_cast<std::size_t>(sites) * kLanes);
            ch.sp.resize(static_cast<std::size_t>(sites) * kLanes);
            ch.tacc.resize(static_cast<std::size_t>(sites) * kLanes);
            ch.n_part.assign(nb8, 0.0);
            ch.z_part.assign(nb8, 0.0);
            ch.sxc_part.assign(static_cast<std::size_t>(n_comp) * nb8, 0.0);
            ch.g_theta.assign(static_cast<std::size_t>(n_comp) * sites, 0.0);
            ch.g_coeff.assign(n_comp, 0.0);
            ch.dc.resize(sites);
            ch.ds.resize(sites);
        }
    }
};

// [chunk_begin, chunk_end) for splitting `total` items into kGradChunks
// fixed ranges.
std::pair<std::size_t, std::size_t> chunk_range(std::size_t total, int chunk) {
    const std::size_t base = total / kGradChunks, rem = total % kGradChunks;
    const std::size_t begin = chunk * base + std::min<std::size_t>(chunk, rem);
    return {begin, begin + base + (static_cast<std::size_t>(chunk) < rem ? 1 : 0)};
}

void batch_eval_ws(const ModelParams& params, std::size_t n, double lambda_c, double lambda_theta,
                   int n_threads, BatchWorkspace& ws, LossReport& loss_out, Gradient& grad_out) {
    const int sites = params.sites;
    const int n_comp = params.components();
    const std::size_t nb8 = ws.nb8;
    const std::size_t n_blocks = nb8 / kLanes;

    // thread spawns cost more than small batches; stay serial below ~1M
    // pair-site-lane visits
    const double pair_work = static_cast<double>(ws.cross_pairs.size()) * sites * nb8;
    if (pair_work < 1.0e6) n_threads = 1;

    // parameter trig for the step
    for (std::size_t i = 0; i < ws.rc.size(); ++i) {
        ws.rc[i] = std::cos(params.theta[i]);
        ws.rs[i] = std::sin(params.theta[i]);
    }

    // same-resolution pairs: no sample dependence, evaluate once per step
    ws.dz_same = 0.0;
    std::fill(ws.sd_c.begin(), ws.sd_c.end(), 0.0);
    std::fill(ws.td_theta.begin(), ws.td_theta.end(), 0.0);
    {
        std::vector<double> d(sites), pre(sites + 1), suf(sites + 1);
        for (int k = 0; k < n_comp; ++k) {
            ws.dz_same += params.coeff[k] * params.coeff[k];
            ws.sd_c[k] += params.coeff[k];
        }
        const int res = params.resolutions;
        for (int k = 0; k < n_comp; ++k) {
            for (int k2 = k + 1; k2 < n_comp; ++k2) {
                if (k % res != k2 % res) continue;
                pre[0] = 1.0;
                for (int l = 0; l < sites; ++l) {
                    const std::size_t a = static_cast<std::size_t>(k) * sites + l;
                    const std::size_t b = static_cast<std::size_t>(k2) * sites + l;
                    d[l] = ws.rc[a] * ws.rc[b] + ws.rs[a] * ws.rs[b];
                    pre[l + 1] = pre[l] * d[l];
                }
                suf[sites] = 1.0;
                for (int l = sites; l-- > 0;) suf[l] = suf[l + 1] * d[l];
                const double w = pre[sites];
                ws.dz_same += 2.0 * params.coeff[k] * params.coeff[k2] * w;
                ws.sd_c[k] += params.coeff[k2] * w;
                ws.sd_c[k2] += params.coeff[k] * w;
                for (int l = 0; l < sites; ++l) {
                    const std::size_t a = static_cast<std::size_t>(k) * sites + l;
                    const std::size_t b = static_cast<std::size_t>(k2) * sites + l;
                    const double sin_l = ws.rs[a] * ws.rc[b] - ws.rc[a] * ws.rs[b];
                    const double v = -sin_l * pre[l] * suf[l + 1];
                    ws.td_theta[a] += params.coeff[k2] * v;
                    ws.td_theta[b] -= params.coeff[k] * v;
                }
            }
        }
    }

    // numerator pass 1: component products G_k and N (chunked over k)
    parallel_for(kGradChunks, n_threads, [&](std::size_t chunk) {
        auto& ch = ws.chunks[chunk];
        std::fill(ch.n_part.begin(), ch.n_part.end(), 0.0);
        const auto [begin, end] = chunk_range(n_comp, static_cast<int>(chunk));
        for (std::size_t k = begin; k < end; ++k) {
            const int p = static_cast<int>(k) % params.resolutions;
            const double* __restrict rck = &ws.rc[k * sites];
            const double* __restrict rsk = &ws.rs[k * sites];
            double* __restrict g = &ws.gk[k * nb8];
            for (std::size_t b = 0; b < n_blocks; ++b) {
                double run[kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) run[j] = 1.0;
                for (int l = 0; l < sites; ++l) {
                    const double* __restrict e_c =
                        &ws.ec[(static_cast<std::size_t>(p) * sites + l) * nb8 + b * kLanes];
                    const double* __restrict e_s =
                        &ws.es[(static_cast<std::size_t>(p) * sites + l) * nb8 + b * kLanes];
                    for (std::size_t j = 0; j < kLanes; ++j)
                        run[j] *= rck[l] * e_c[j] - rsk[l] * e_s[j];
                }
                const double c_k = params.coeff[k];
                for (std::size_t j = 0; j < kLanes; ++j) {
                    g[b * kLanes + j] = run[j];
                    ch.n_part[b * kLanes + j] += c_k * run[j];
                }
            }
        }
    });
    std::fill(ws.n_val.begin(), ws.n_val.end(), 0.0);
    for (const auto& ch : ws.chunks)
        for (std::size_t s = 0; s < nb8; ++s) ws.n_val[s] += ch.n_part[s];

    // Z pass 1 over cross-resolution pairs (chunked)
    const std::size_t n_pairs = ws.cross_pairs.size();
    parallel_for(kGradChunks, n_threads, [&](std::size_t chunk) {
        auto& ch = ws.chunks[chunk];
        std::fill(ch.z_part.begin(), ch.z_part.end(), 0.0);
        std::fill(ch.sxc_part.begin(), ch.sxc_part.end(), 0.0);
        const auto [begin, end] = chunk_range(n_pairs, static_cast<int>(chunk));
        for (std::size_t pi = begin; pi < end; ++pi) {
            const auto [k, k2, pb] = ws.cross_pairs[pi];
            const double* __restrict rck = &ws.rc[static_cast<std::size_t>(k) * sites];
            const double* __restrict rsk = &ws.rs[static_cast<std::size_t>(k) * sites];
            const double* __restrict rck2 = &ws.rc[static_cast<std::size_t>(k2) * sites];
            const double* __restrict rsk2 = &ws.rs[static_cast<std::size_t>(k2) * sites];
            double* __restrict dc = ch.dc.data();
            double* __restrict ds = ch.ds.data();
            for (int l = 0; l < sites; ++l) {
                dc[l] = rck[l] * rck2[l] + rsk[l] * rsk2[l];
                ds[l] = rsk[l] * rck2[l] - rck[l] * rsk2[l];
            }
            const double c_k = params.coeff[k], c_k2 = params.coeff[k2];
            const std::size_t ub = static_cast<std::size_t>(pb) * sites;
            for (std::size_t b = 0; b < n_blocks; ++b) {
                double run[kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) run[j] = 1.0;
                for (int l = 0; l < sites; ++l) {
                    const double* __restrict u_c = &ws.uc[(ub + l) * nb8 + b * kLanes];
                    const double* __restrict u_s = &ws.us[(ub + l) * nb8 + b * kLanes];
                    for (std::size_t j = 0; j < kLanes; ++j)
                        run[j] *= dc[l] * u_c[j] - ds[l] * u_s[j];
                }
                double* __restrict zp = &ch.z_part[b * kLanes];
                double* __restrict sx_k = &ch.sxc_part[static_cast<std::size_t>(k) * nb8 + b * kLanes];
                double* __restrict sx_k2 =
                    &ch.sxc_part[static_cast<std::size_t>(k2) * nb8 + b * kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) {
                    zp[j] += 2.0 * c_k * c_k2 * run[j];
                    sx_k[j] += c_k2 * run[j];
                    sx_k2[j] += c_k * run[j];
                }
            }
        }
    });
    for (std::size_t s = 0; s < nb8; ++s) ws.z_val[s] = ws.dz_same;
    std::fill(ws.sxc.begin(), ws.sxc.end(), 0.0);
    for (const auto& ch : ws.chunks) {
        for (std::size_t s = 0; s < nb8; ++s) ws.z_val[s] += ch.z_part[s];
        for (std::size_t i = 0; i < ws.sxc.size(); ++i) ws.sxc[i] += ch.sxc_part[i];
    }

    // per-sample scalars; anything outside the safe band goes to the
    // signed-log fallback (padded lanes keep zero weights)
    std::size_t fallback_count = 0;
    for (std::size_t s = 0; s < n; ++s) {
        ws.needs_fallback[s] = 0;
        const double nv = ws.n_val[s], zv = ws.z_val[s];
        if (!fast_path_ok(nv, zv)) {
            ws.needs_fallback[s] = 1;
            ws.inv_n[s] = 0.0;
            ws.inv_z[s] = 0.0;
            ws.sample_loss[s] = 0.0;
            ++fallback_count;
            continue;
        }
        const double log_score = 2.0 * std::log(std::fabs(nv)) - std::log(zv);
        if (log_score <= kLogScoreFloor) {
            // flat region: contributes the floor loss, no gradient
            ws.inv_n[s] = 0.0;
            ws.inv_z[s] = 0.0;
            ws.sample_loss[s] = -kLogScoreFloor;
        } else {
            ws.inv_n[s] = 1.0 / nv;
            ws.inv_z[s] = 1.0 / zv;
            ws.sample_loss[s] = std::max(-log_score, 0.0);
        }
    }

    // numerator pass 2: theta and coeff gradients (chunked over k); 1/N
    // rides in the prefix seed
    parallel_for(kGradChunks, n_threads, [&](std::size_t chunk) {
        auto& ch = ws.chunks[chunk];
        std::fill(ch.g_theta.begin(), ch.g_theta.end(), 0.0);
        std::fill(ch.g_coeff.begin(), ch.g_coeff.end(), 0.0);
        const auto [begin, end] = chunk_range(n_comp, static_cast<int>(chunk));
        for (std::size_t k = begin; k < end; ++k) {
            const int p = static_cast<int>(k) % params.resolutions;
            const double c_k = params.coeff[k];
            ch.g_coeff[k] -= 2.0 * dot_blocked(&ws.gk[k * nb8], ws.inv_n.data(), nb8);

            const double* __restrict rck = &ws.rc[k * sites];
            const double* __restrict rsk = &ws.rs[k * sites];
            std::fill(ch.tacc.begin(), ch.tacc.end(), 0.0);
            for (std::size_t b = 0; b < n_blocks; ++b) {
                double* __restrict pre = ch.pre.data();
                double* __restrict cp = ch.cp.data();
                double* __restrict sp = ch.sp.data();
                for (std::size_t j = 0; j < kLanes; ++j) pre[j] = ws.inv_n[b * kLanes + j];
                for (int l = 0; l < sites; ++l) {
                    const double* __restrict e_c =
                        &ws.ec[(static_cast<std::size_t>(p) * sites + l) * nb8 + b * kLanes];
                    const double* __restrict e_s =
                        &ws.es[(static_cast<std::size_t>(p) * sites + l) * nb8 + b * kLanes];
                    double* __restrict cpl = cp + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict spl = sp + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict dst = pre + static_cast<std::size_t>(l + 1) * kLanes;
                    const double* __restrict src = pre + static_cast<std::size_t>(l) * kLanes;
                    for (std::size_t j = 0; j < kLanes; ++j) {
                        cpl[j] = rck[l] * e_c[j] - rsk[l] * e_s[j];
                        spl[j] = rsk[l] * e_c[j] + rck[l] * e_s[j];
                        dst[j] = src[j] * cpl[j];
                    }
                }
                double suf[kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) suf[j] = 1.0;
                for (int l = sites; l-- > 0;) {
                    const double* __restrict cpl = cp + static_cast<std::size_t>(l) * kLanes;
                    const double* __restrict spl = sp + static_cast<std::size_t>(l) * kLanes;
                    const double* __restrict pl = pre + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict ta = &ch.tacc[static_cast<std::size_t>(l) * kLanes];
                    for (std::size_t j = 0; j < kLanes; ++j) {
                        ta[j] += spl[j] * pl[j] * suf[j];
                        suf[j] *= cpl[j];
                    }
                }
            }
            for (int l = 0; l < sites; ++l) {
                double t = 0.0;
                for (std::size_t j = 0; j < kLanes; ++j)
                    t += ch.tacc[static_cast<std::size_t>(l) * kLanes + j];
                ch.g_theta[k * sites + l] += 2.0 * c_k * t;
            }
        }
    });

    // Z pass 2 over cross pairs (chunked); 1/Z rides in the prefix seed
    parallel_for(kGradChunks, n_threads, [&](std::size_t chunk) {
        auto& ch = ws.chunks[chunk];
        const auto [begin, end] = chunk_range(n_pairs, static_cast<int>(chunk));
        for (std::size_t pi = begin; pi < end; ++pi) {
            const auto [k, k2, pb] = ws.cross_pairs[pi];
            const double* __restrict rck = &ws.rc[static_cast<std::size_t>(k) * sites];
            const double* __restrict rsk = &ws.rs[static_cast<std::size_t>(k) * sites];
            const double* __restrict rck2 = &ws.rc[static_cast<std::size_t>(k2) * sites];
            const double* __restrict rsk2 = &ws.rs[static_cast<std::size_t>(k2) * sites];
            double* __restrict dc = ch.dc.data();
            double* __restrict ds = ch.ds.data();
            for (int l = 0; l < sites; ++l) {
                dc[l] = rck[l] * rck2[l] + rsk[l] * rsk2[l];
                ds[l] = rsk[l] * rck2[l] - rck[l] * rsk2[l];
            }
            const double cc2 = 2.0 * params.coeff[k] * params.coeff[k2];
            const std::size_t ub = static_cast<std::size_t>(pb) * sites;
            std::fill(ch.tacc.begin(), ch.tacc.end(), 0.0);
            for (std::size_t b = 0; b < n_blocks; ++b) {
                double* __restrict pre = ch.pre.data();
                double* __restrict cp = ch.cp.data();
                double* __restrict sp = ch.sp.data();
                for (std::size_t j = 0; j < kLanes; ++j) pre[j] = ws.inv_z[b * kLanes + j];
                for (int l = 0; l < sites; ++l) {
                    const double* __restrict u_c = &ws.uc[(ub + l) * nb8 + b * kLanes];
                    const double* __restrict u_s = &ws.us[(ub + l) * nb8 + b * kLanes];
                    double* __restrict cpl = cp + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict spl = sp + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict dst = pre + static_cast<std::size_t>(l + 1) * kLanes;
                    const double* __restrict src = pre + static_cast<std::size_t>(l) * kLanes;
                    for (std::size_t j = 0; j < kLanes; ++j) {
                        cpl[j] = dc[l] * u_c[j] - ds[l] * u_s[j];
                        spl[j] = ds[l] * u_c[j] + dc[l] * u_s[j];
                        dst[j] = src[j] * cpl[j];
                    }
                }
                double suf[kLanes];
                for (std::size_t j = 0; j < kLanes; ++j) suf[j] = 1.0;
                for (int l = sites; l-- > 0;) {
                    const double* __restrict cpl = cp + static_cast<std::size_t>(l) * kLanes;
                    const double* __restrict spl = sp + static_cast<std::size_t>(l) * kLanes;
                    const double* __restrict pl = pre + static_cast<std::size_t>(l) * kLanes;
                    double* __restrict ta = &ch.tacc[static_cast<std::size_t>(l) * kLanes];
                    for (std::size_t j = 0; j < kLanes; ++j) {
                        ta[j] += spl[j] * pl[j] * suf[j];
                        suf[j] *= cpl[j];
                    }
                }
            }
            for (int l = 0; l < sites; ++l) {
                double t = 0.0;
                for (std::size_t j = 0; j < kLanes; ++j)
                    t += ch.tacc[static_cast<std::size_t>(l) * kLanes + j];
                // dZ/dtheta_k = -cc2 sin excl / Z; theta_k2 flips sign
                ch.g_theta[static_cast<std::size_t>(k) * sites + l] -= cc2 * t;
                ch.g_theta[static_cast<std::size_t>(k2) * sites + l] += cc2 * t;
            }
        }
    });

    // assemble
    grad_out.theta.assign(params.theta.size(), 0.0);
    grad_out.coeff.assign(params.coeff.size(), 0.0);
    for (const auto& ch : ws.chunks) {
        for (std::size_t i = 0; i < grad_out.theta.size(); ++i) grad_out.theta[i] += ch.g_theta[i];
        for (std::size_t i = 0; i < grad_out.coeff.size(); ++i) grad_out.coeff[i] += ch.g_coeff[i];
    }
    double sum_inv_z = 0.0;
    for (std::size_t s = 0; s < nb8; ++s) sum_inv_z += ws.inv_z[s];
    for (int k = 0; k < n_comp; ++k) {
        const double acc =
            ws.sd_c[k] * sum_inv_z +
            dot_blocked(&ws.sxc[static_cast<std::size_t>(k) * nb8], ws.inv_z.data(), nb8);
        grad_out.coeff[k] += 2.0 * acc;
        for (int l = 0; l < sites; ++l)
            grad_out.theta[static_cast<std::size_t>(k) * sites + l] +=
                2.0 * params.coeff[k] * ws.td_theta[static_cast<std::size_t>(k) * sites + l] *
                sum_inv_z;
    }

    double loss_sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) loss_sum += ws.sample_loss[s];

    // stable signed-log fallback for flagged samples, in sample order
    if (fallback_count > 0) {
        for (std::size_t s = 0; s < n; ++s) {
            if (!ws.needs_fallback[s]) continue;
            loss_sum += stable_sample_gradient(
                params,
                std::span<const double>(ws.batch_rows).subspan(s * sites, sites),
                grad_out.theta, grad_out.coeff);
        }
    }

    const double inv_batch = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < grad_out.theta.size(); ++i)
        grad_out.theta[i] = grad_out.theta[i] * inv_batch + 2.0 * lambda_theta * params.theta[i];
    for (std::size_t i = 0; i < grad_out.coeff.size(); ++i)
        grad_out.coeff[i] = grad_out.coeff[i] * inv_batch + 2.0 * lambda_c * params.coeff[i];

    loss_out.nll = loss_sum * inv_batch;
    loss_out.mean_log_score = -loss_out.nll;
    loss_out.reg = regularizer(params, lambda_c, lambda_theta);
    loss_out.total = loss_out.nll + loss_out.reg;
}

}  // namespace

BatchEval batch_eval(const ModelParams& params, std::span<const double> batch_rows,
                     std::size_t n_rows, double lambda_c, double lambda_theta, int n_threads) {
    if (n_rows == 0) throw std::domain_error("batch_eval: empty batch");
    if (batch_rows.size() != n_rows * static_cast<std::size_t>(params.sites))
        throw std::domain_error("batch_eval: batch buffer size mismatch");
    BatchWorkspace ws;
    ws.set_shape(params);
    ws.set_dataset(batch_rows.data(), n_rows);
    std::vector<std::size_t> idx(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) idx[i] = i;
    ws.gather_batch(idx);
    BatchEval out;
    batch_eval_ws(params, n_rows, lambda_c, lambda_theta, n_threads, ws, out.loss, out.grad);
    return out;
}

}  // namespace detail


TrainResult train(const NormalizedDataset& data, int mixtures, int resolutions,
                  const TrainConfig& config, int n_threads) {
    if (data.tags.size() != data.rows)
        throw std::domain_error("train: dataset has not been split");
    config.validate();
    const std::vector<double> train_rows = data.rows_with_tag(SplitTag::Train);
    const std::size_t n_train = train_rows.size() / std::max<std::size_t>(data.cols, 1);
    if (n_train == 0) throw std::runtime_error("train: empty training set");

    const int batch = config.resolve_batch_size(n_train);
    const long epochs = config.resolve_epochs(n_train);
    const int sites = static_cast<int>(data.cols);

    TrainResult result;
    result.batch_size = batch;
    result.epochs = epochs;
    result.params = ModelParams::random_init(sites, mixtures, resolutions, config.seed);
    result.history.reserve(epochs);

    OptimizerState state = OptimizerState::for_params(result.params);
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, SeedStream::Shuffle));
    std::vector<std::size_t> perm(n_train);
    for (std::size_t i = 0; i < n_train; ++i) perm[i] = i;

    detail::BatchWorkspace ws;
    ws.set_shape(result.params);
    ws.set_dataset(train_rows.data(), n_train);
    ModelParams last_good = result.params;
    Gradient grad;
    LossReport batch_loss;

    for (long epoch = 0; epoch < epochs; ++epoch) {
        fisher_yates_shuffle(perm, shuffle_rng);
        LossReport epoch_report;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n_train; start += batch) {
            const std::size_t b = std::min<std::size_t>(batch, n_train - start);
            ws.gather_batch(std::span<const std::size_t>(perm).subspan(start, b));
            try {
                detail::batch_eval_ws(result.params, b, config.lambda_c, config.lambda_theta,
                                      n_threads, ws, batch_loss, grad);
                if (!std::isfinite(batch_loss.total))
                    throw numerical_error("train: non-finite loss");
                last_good = result.params;
                adam_step(result.params, grad, state, config);
            } catch (const numerical_error& e) {
                result.params = last_good;
                result.diverged = true;
                result.diagnostic = std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) + ")";
                return result;
            } catch (const degenerate_state_error& e) {
                result.params = last_good;
                result.diverged = true;
                result.diagnostic = std::string(e.what()) + " (epoch " + std::to_string(epoch + 1) + ")";
                return result;
            }
            epoch_report.nll += batch_loss.nll;
            epoch_report.reg += batch_loss.reg;
            epoch_report.total += batch_loss.total;
            ++n_batches;
        }
        const double inv = 1.0 / static_cast<double>(n_batches);
        epoch_report.nll *= inv;
        epoch_report.reg *= inv;
        epoch_report.total *= inv;
        epoch_report.mean_log_score = -epoch_report.nll;
        result.history.push_back(epoch_report);
    }
    return result;
}

}  // namespace smtad
