#include "unmix/minvolfit.hpp"

#include "unmix/datagen.hpp"
#include "unmix/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace unmix {

namespace {

// Volume formula without the strict-positivity domain check; solver iterates
// live in the relaxed set f >= 0, ||f|| = 1.
double vol_formula(const Vec& f) {
    const double m = static_cast<double>(f.size());
    const double dot = f.sum();
    return 1.0 - (dot * dot) / (m * f.squaredNorm());
}

// The one canonical patch-residual evaluation. Every acceptance test and the
// recorded trace go through this exact expression; together with the
// monotonicity of rounded sums that makes the recorded objective trace
// non-increasing bit for bit rather than within a tolerance.
template <typename Coef>
double patch_resid(const Mat& Y, const Vec& v, const Vec& f, const Coef& C, Vec& vf) {
    vf.noalias() = v.cwiseProduct(f);
    double s = 0.0;
    for (int j = 0; j < Y.cols(); ++j)
        s += (Y.col(j) - C(0, j) * vf - C(1, j) * v).squaredNorm();
    return s;
}

double fold_objective(const std::vector<double>& patch_values, double lambda, const Vec& f) {
    double s = 0.0;
    for (double x : patch_values) s += x;
    if (lambda != 0.0) s += lambda * vol_formula(f);
    return s;
}

}  // namespace

// ============================================================================
// Objective and gradients
// ============================================================================

double objective_g(const PatchSet& bag, const ModelParams& params, double lambda) {
    double g = residual(bag, params);
    if (lambda != 0.0) g += lambda * vol_formula(params.f);
    return g;
}

CoefMat block_gradient_C(const PatchSet& bag, const ModelParams& params, int k) {
    const Mat& Y = bag.patches[k].data;
    Mat A(Y.rows(), 2);
    A.col(0) = params.v[k].cwiseProduct(params.f);
    A.col(1) = params.v[k];
    const Mat R = Y - A * params.C[k];
    return CoefMat(-2.0 * (A.transpose() * R));
}

Vec block_gradient_v(const PatchSet& bag, const ModelParams& params, int k) {
    const Mat& Y = bag.patches[k].data;
    const CoefMat& C = params.C[k];
    Mat B = params.f * C.row(0);
    B.rowwise() += C.row(1);
    const Mat R = Y - params.v[k].asDiagonal() * B;
    return -2.0 * R.cwiseProduct(B).rowwise().sum();
}

Vec block_gradient_f(const PatchSet& bag, const ModelParams& params, double lambda) {
    Vec g = Vec::Zero(params.f.size());
    for (int k = 0; k < bag.count(); ++k) {
        const Mat& Y = bag.patches[k].data;
        Mat A(Y.rows(), 2);
        A.col(0) = params.v[k].cwiseProduct(params.f);
        A.col(1) = params.v[k];
        const Mat R = Y - A * params.C[k];
        g.noalias() += -2.0 * params.v[k].cwiseProduct(R * params.C[k].row(0).transpose());
    }
    if (lambda != 0.0) g += lambda * volume_gradient(params.f);
    return g;
}

Mat block_gradients(const PatchSet& bag, const ModelParams& params, double lambda,
                    Block block, int k) {
    switch (block) {
        case Block::C_k:
            if (k < 0 || k >= bag.count()) throw UsageError("block_gradients: bad patch index");
            return Mat(block_gradient_C(bag, params, k));
        case Block::v_k:
            if (k < 0 || k >= bag.count()) throw UsageError("block_gradients: bad patch index");
            return Mat(block_gradient_v(bag, params, k));
        case Block::f:
            return Mat(block_gradient_f(bag, params, lambda));
    }
    throw UsageError("block_gradients: unknown block");
}

// ============================================================================
// Solver
// ============================================================================

namespace {

struct SolverState {
    Vec f;
    std::vector<Vec> v;
    std::vector<CoefMat> C;
    std::vector<double> resid;  // current per-patch canonical residual values

    ModelParams as_params() const {
        ModelParams p;
        p.f = f;
        p.v = v;
        p.C = C;
        return p;
    }
};

SolverState initialize(const PatchSet& bag, const MinVolConfig& cfg, std::uint64_t seed) {
    const int M = bag.bands();
    const int K = bag.count();
    SolverState st;
    st.v.resize(K);
    st.C.resize(K);
    st.resid.resize(K);
    if (cfg.warm_start) {
        const ModelParams& w = *cfg.warm_start;
        if (w.bands() != M || w.count() != K)
            throw DimensionError("minvolfit: warm start shape mismatch");
        // Normalizing f and v must not change the product diag(v)[f 1]C, so
        // the dropped scales move into the matching C rows.
        const double f_scale = w.f.cwiseMax(0.0).norm();
        st.f = project_unit_nonneg(w.f);
        for (int k = 0; k < K; ++k) {
            if (w.C[k].cols() != bag.patches[k].pixels())
                throw DimensionError("minvolfit: warm start C shape mismatch");
            const double v_scale = w.v[k].cwiseMax(0.0).norm();
            st.v[k] = project_unit_nonneg(w.v[k]);
            st.C[k] = w.C[k].cwiseMax(0.0);
            if (v_scale > 0.0) st.C[k] *= v_scale;
            if (f_scale > 0.0) st.C[k].row(0) *= f_scale;
        }
        return st;
    }
    Rng rng(seed);
    st.f.resize(M);
    for (int i = 0; i < M; ++i) st.f(i) = rng.uniform(0.1, 1.1);
    st.f = project_unit_nonneg(st.f);
    for (int k = 0; k < K; ++k) {
        st.v[k].resize(M);
        for (int i = 0; i < M; ++i) st.v[k](i) = rng.uniform(0.1, 1.1);
        st.v[k] = project_unit_nonneg(st.v[k]);
        const int n = bag.patches[k].pixels();
        st.C[k].resize(2, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < 2; ++i) st.C[k](i, j) = rng.uniform(0.1, 1.1);
    }
    return st;
}

}  // namespace

FitResult minvolfit(const PatchSet& bag, const MinVolConfig& cfg) {
    bag.validate(-1.0);  // dimensions only; noisy columns may be tiny
    if (cfg.n_iters < 1) throw InvalidInputError("minvolfit: n_iters must be >= 1");
    if (cfg.lambda < 0.0) throw InvalidInputError("minvolfit: lambda must be >= 0");
    if (!cfg.skip_rank_check) {
        for (int k = 0; k < bag.count(); ++k)
            if (!patch_rank2_check(bag.patches[k], cfg.rank_tol))
                throw InvalidInputError("minvolfit: patch " + std::to_string(k) +
                                        " fails the rank-2 check (set skip_rank_check "
                                        "to override)");
    }

    const int M = bag.bands();
    const int K = bag.count();
    const StepControl& ctrl = cfg.step;

    SolverState st = initialize(bag, cfg, cfg.seed);

    // Workspaces sized once; the sweep loop does no allocation.
    Vec vf(M), bcol(M), rcol(M);
    CoefMat gradC, candC;
    Vec gradV(M), candV(M), gradF(M), candF(M);
    std::vector<double> trial_resid(K);
    int max_n = 0;
    for (int k = 0; k < K; ++k) max_n = std::max(max_n, bag.patches[k].pixels());
    gradC.resize(2, max_n);
    candC.resize(2, max_n);

    // Per-block step memory: the search starts at twice the last accepted
    // eta (capped at eta0) instead of eta0 every time. Restarting from eta0
    // costs ~10x in backtrack evaluations on poorly scaled blocks.
    std::vector<double> etaC(K, ctrl.eta0), etaV(K, ctrl.eta0);
    double etaF = ctrl.eta0;
    auto start_eta = [&](double mem) { return std::min(ctrl.eta0, 2.0 * mem); };

    for (int k = 0; k < K; ++k)
        st.resid[k] = patch_resid(bag.patches[k].data, st.v[k], st.f, st.C[k], vf);

    FitResult out;
    out.seed_used = cfg.seed;
    out.objective_trace.reserve(
        static_cast<std::size_t>(std::min<long>(cfg.n_iters, 1 << 22)) + 1);
    out.objective_trace.push_back(fold_objective(st.resid, cfg.lambda, st.f));
    if (!std::isfinite(out.objective_trace.back()))
        throw NumericError("minvolfit: objective not finite at initialization", 0);

    long sweep = 0;
    for (; sweep < cfg.n_iters; ++sweep) {
        for (int k = 0; k < K; ++k) {
            const Mat& Y = bag.patches[k].data;
            const int n = bag.patches[k].pixels();
            const Vec& v = st.v[k];

            // --- C^(k) step, projection onto the nonnegative orthant ---
            // grad = -2 A' (Y - A C) with A = [v.*f, v], fused per column.
            vf.noalias() = v.cwiseProduct(st.f);
            {
                CoefMat& C = st.C[k];
                double g2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    rcol.noalias() = Y.col(j) - C(0, j) * vf - C(1, j) * v;
                    gradC(0, j) = -2.0 * vf.dot(rcol);
                    gradC(1, j) = -2.0 * v.dot(rcol);
                    g2 += gradC(0, j) * gradC(0, j) + gradC(1, j) * gradC(1, j);
                }
                const double base = st.resid[k];
                double eta = start_eta(etaC[k]);
                for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
                    bool identity = true;
                    bool moved = false;
                    for (int c = 0; c < n; ++c) {
                        for (int i = 0; i < 2; ++i) {
                            double x = C(i, c) - eta * gradC(i, c);
                            if (x < 0.0) {
                                identity = false;
                                x = 0.0;
                            }
                            candC(i, c) = x;
                            moved |= x != C(i, c);
                        }
                    }
                    const double bound = identity ? base - ctrl.armijo_c * eta * g2 : base;
                    const double val =
                        patch_resid(Y, v, st.f, candC.leftCols(n), vf);
                    if (std::isfinite(val) && val <= bound) {
                        if (moved) {
                            C = candC.leftCols(n);
                            st.resid[k] = val;
                            etaC[k] = eta;
                        }
                        break;
                    }
                }
            }

            // --- v^(k) step, projection onto sphere ∩ orthant ---
            // grad_i = -2 sum_j (Y_ij - v_i B_ij) B_ij with B = [f 1] C.
            {
                const CoefMat& C = st.C[k];
                gradV.setZero();
                for (int j = 0; j < n; ++j) {
                    bcol.noalias() = C(0, j) * st.f;
                    bcol.array() += C(1, j);
                    rcol.noalias() = Y.col(j) - v.cwiseProduct(bcol);
                    gradV.noalias() -= 2.0 * rcol.cwiseProduct(bcol);
                }
                const double g2 = gradV.squaredNorm();
                const double base = st.resid[k];
                double eta = start_eta(etaV[k]);
                for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
                    candV.noalias() = v - eta * gradV;
                    const bool identity =
                        (candV.array() >= 0.0).all() && candV.squaredNorm() == 1.0;
                    candV = project_unit_nonneg(candV);
                    const double bound = identity ? base - ctrl.armijo_c * eta * g2 : base;
                    const double val = patch_resid(Y, candV, st.f, C, vf);
                    if (std::isfinite(val) && val <= bound) {
                        if (val < base || (candV - v).squaredNorm() > 0.0) {
                            st.v[k] = candV;
                            st.resid[k] = val;
                            etaV[k] = eta;
                        }
                        break;
                    }
                }
            }
        }

        // --- f step, projection onto sphere ∩ orthant, vol term included ---
        gradF.setZero();
        for (int k = 0; k < K; ++k) {
            const Mat& Y = bag.patches[k].data;
            const CoefMat& C = st.C[k];
            const Vec& v = st.v[k];
            vf.noalias() = v.cwiseProduct(st.f);
            for (int j = 0; j < Y.cols(); ++j) {
                rcol.noalias() = Y.col(j) - C(0, j) * vf - C(1, j) * v;
                gradF.noalias() -= (2.0 * C(0, j)) * rcol.cwiseProduct(v);
            }
        }
        if (cfg.lambda != 0.0) gradF += cfg.lambda * volume_gradient(st.f);
        {
            const double g2 = gradF.squaredNorm();
            const double base = fold_objective(st.resid, cfg.lambda, st.f);
            double accepted = base;
            double eta = start_eta(etaF);
            for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
                candF.noalias() = st.f - eta * gradF;
                const bool identity =
                    (candF.array() >= 0.0).all() && candF.squaredNorm() == 1.0;
                candF = project_unit_nonneg(candF);
                const double bound = identity ? base - ctrl.armijo_c * eta * g2 : base;
                for (int k = 0; k < K; ++k)
                    trial_resid[k] =
                        patch_resid(bag.patches[k].data, st.v[k], candF, st.C[k], vf);
                const double val = fold_objective(trial_resid, cfg.lambda, candF);
                if (std::isfinite(val) && val <= bound) {
                    if (val < base || (candF - st.f).squaredNorm() > 0.0) {
                        st.f = candF;
                        st.resid = trial_resid;
                        etaF = eta;
                        accepted = val;
                    }
                    break;
                }
            }
            if (!std::isfinite(accepted))
                throw NumericError("minvolfit: objective not finite", sweep + 1);
            out.objective_trace.push_back(accepted);
        }

        if (cfg.on_sweep) cfg.on_sweep(st.as_params(), sweep + 1);

        if (cfg.early_stop_rel_tol && out.objective_trace.size() >= 2) {
            const double prev = out.objective_trace[out.objective_trace.size() - 2];
            const double cur = out.objective_trace.back();
            const double rel = (prev - cur) / std::max(prev, 1e-300);
            if (rel < *cfg.early_stop_rel_tol) {
                ++sweep;
                break;
            }
        }
    }

    out.params = st.as_params();
    out.iterations_run = sweep;
    double r = 0.0;
    for (double x : st.resid) r += x;
    out.final_residual = r;
    return out;
}

FitResult minvolfit_multistart(const PatchSet& bag, const MinVolConfig& cfg) {
    const int starts = std::max(1, cfg.n_starts);
    FitResult best;
    bool have = false;
    for (int s = 0; s < starts; ++s) {
        MinVolConfig c = cfg;
        c.n_starts = 1;
        c.seed = (s == 0) ? cfg.seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
        FitResult r = minvolfit(bag, c);
        if (!have || r.final_objective() < best.final_objective()) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

// ============================================================================
// Timing probe
// ============================================================================

std::vector<ScalingRow> wallclock_scaling_probe(
    const std::vector<std::array<int, 3>>& shapes, long sweeps, int reps,
    std::uint64_t seed) {
    std::vector<ScalingRow> rows;
    rows.reserve(shapes.size());
    for (const auto& s : shapes) {
        SynthConfig dc;
        dc.K = s[0];
        dc.N = s[1];
        dc.M = s[2];
        dc.r = 1.0;
        dc.p = 0.5;
        dc.is_strict = true;
        dc.snr = 1e4;
        dc.seed = seed;
        auto [bag, truth] = generate_bag(dc);

        std::vector<double> times;
        times.reserve(reps);
        for (int rep = 0; rep < reps; ++rep) {
            MinVolConfig fc;
            fc.lambda = 1e-4;
            fc.n_iters = sweeps;
            fc.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
            fc.skip_rank_check = true;
            const auto t0 = std::chrono::steady_clock::now();
            minvolfit(bag, fc);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count() /
                            static_cast<double>(sweeps));
        }
        std::sort(times.begin(), times.end());
        ScalingRow row;
        row.K = s[0];
        row.N = s[1];
        row.M = s[2];
        row.total_pixels = static_cast<long>(s[0]) * s[1];
        row.sec_per_sweep = times[times.size() / 2];
        rows.push_back(row);
    }
    return rows;
}

}  // namespace unmix
