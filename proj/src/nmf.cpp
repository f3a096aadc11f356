#include "unmix/nmf.hpp"

#include "unmix/rng.hpp"

#include <cmath>

namespace unmix {

namespace {

double logdet_term(const Mat& W, double delta) {
    const double g00 = W.col(0).squaredNorm() + delta;
    const double g11 = W.col(1).squaredNorm() + delta;
    const double g01 = W.col(0).dot(W.col(1));
    return std::log(g00 * g11 - g01 * g01);
}

double nmf_objective(const Mat& Y, const Mat& W, const Mat& H, double lambda,
                     double delta) {
    return (Y - W * H).squaredNorm() + lambda * logdet_term(W, delta);
}

// Clamp to the orthant, then rescale columns to norm tau (H untouched here;
// the caller compensates). Fixing the column scale removes the logdet term's
// scale drift (the objective otherwise decreases without bound along
// W -> sW, H -> H/s as s -> 0).
Mat project_W(const Mat& W, double tau) {
    Mat P = W.cwiseMax(0.0);
    for (int c = 0; c < P.cols(); ++c) {
        const double n = P.col(c).norm();
        if (n > 0.0)
            P.col(c) *= tau / n;
        else
            P.col(c).setConstant(tau / std::sqrt(static_cast<double>(P.rows())));
    }
    return P;
}

NmfResult run_single(const Mat& Y, const NmfConfig& cfg, std::uint64_t seed,
                     long clamped) {
    const int M = static_cast<int>(Y.rows());
    const int N = static_cast<int>(Y.cols());
    const double tau = Y.colwise().norm().mean();
    const StepControl& ctrl = cfg.step;

    Rng rng(seed);
    Mat W(M, 2), H(2, N);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < M; ++i) W(i, j) = rng.uniform(0.1, 1.1);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < 2; ++i) H(i, j) = rng.uniform(0.1, 1.1);
    W = project_W(W, tau);

    NmfResult out;
    out.clamped_negatives = clamped;
    out.objective_trace.reserve(static_cast<std::size_t>(cfg.n_iters) + 1);
    out.objective_trace.push_back(nmf_objective(Y, W, H, cfg.lambda, cfg.delta));

    Mat R(M, N), gradW(M, 2), candW(M, 2), gradH(2, N), candH(2, N);
    double etaW = ctrl.eta0, etaH = ctrl.eta0;
    auto start_eta = [&](double mem) { return std::min(ctrl.eta0, 2.0 * mem); };

    double current = out.objective_trace.back();
    long it = 0;
    for (; it < cfg.n_iters; ++it) {
        // W step: residual gradient plus logdet gradient 2 lambda W (W'W+dI)^-1.
        R.noalias() = Y - W * H;
        Eigen::Matrix2d G;
        G(0, 0) = W.col(0).squaredNorm() + cfg.delta;
        G(1, 1) = W.col(1).squaredNorm() + cfg.delta;
        G(0, 1) = G(1, 0) = W.col(0).dot(W.col(1));
        gradW.noalias() = -2.0 * (R * H.transpose());
        gradW.noalias() += 2.0 * cfg.lambda * (W * G.inverse());
        {
            double eta = start_eta(etaW);
            for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
                candW = project_W(W - eta * gradW, tau);
                const double val = nmf_objective(Y, candW, H, cfg.lambda, cfg.delta);
                if (std::isfinite(val) && val <= current) {
                    W = candW;
                    current = val;
                    etaW = eta;
                    break;
                }
            }
        }

        // H step: plain nonnegative projection; logdet unchanged.
        R.noalias() = Y - W * H;
        gradH.noalias() = -2.0 * (W.transpose() * R);
        {
            double eta = start_eta(etaH);
            for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
                candH = (H - eta * gradH).cwiseMax(0.0);
                const double val = nmf_objective(Y, W, candH, cfg.lambda, cfg.delta);
                if (std::isfinite(val) && val <= current) {
                    H = candH;
                    current = val;
                    etaH = eta;
                    break;
                }
            }
        }

        if (!std::isfinite(current))
            throw NumericError("minvol_nmf: objective not finite", it + 1);
        out.objective_trace.push_back(current);

        if (cfg.early_stop_rel_tol && out.objective_trace.size() >= 2) {
            const double prev = out.objective_trace[out.objective_trace.size() - 2];
            const double rel = (prev - current) / std::max(prev, 1e-300);
            if (rel < *cfg.early_stop_rel_tol) {
                ++it;
                break;
            }
        }
    }

    out.W = W;
    out.H = H;
    out.iterations_run = it;
    return out;
}

}  // namespace

NmfResult minvol_nmf(const Mat& Y, const NmfConfig& cfg) {
    if (cfg.delta <= 0.0) throw InvalidInputError("minvol_nmf: delta must be positive");
    if (cfg.lambda < 0.0) throw InvalidInputError("minvol_nmf: lambda must be >= 0");
    if (Y.size() == 0) throw InvalidInputError("minvol_nmf: empty input");

    Mat Yc = Y;
    long clamped = 0;
    for (int j = 0; j < Yc.cols(); ++j)
        for (int i = 0; i < Yc.rows(); ++i)
            if (Yc(i, j) < 0.0) {
                Yc(i, j) = 0.0;
                ++clamped;
            }

    const int starts = std::max(1, cfg.n_starts);
    NmfResult best;
    bool have = false;
    for (int s = 0; s < starts; ++s) {
        const std::uint64_t seed =
            (s == 0) ? cfg.seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(s));
        NmfResult r = run_single(Yc, cfg, seed, clamped);
        if (!have || r.final_objective() < best.final_objective()) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

Vec benchmark_extract(const PatchSet& bag, const NmfConfig& cfg, NmfResult* diag) {
    bag.validate(-1.0);
    Mat Yall(bag.bands(), bag.total_pixels());
    long col = 0;
    for (const auto& p : bag.patches) {
        Yall.middleCols(col, p.pixels()) = p.data;
        col += p.pixels();
    }
    NmfResult r = minvol_nmf(Yall, cfg);
    Mat W = r.W.cwiseMax(cfg.delta);
    if (diag) *diag = std::move(r);
    return W.col(0).cwiseQuotient(W.col(1));
}

}  // namespace unmix
