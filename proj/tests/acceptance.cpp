// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria. Pass criterion numbers as arguments to run a subset.

#include "unmix/datagen.hpp"
#include "unmix/epfit.hpp"
#include "unmix/io.hpp"
#include "unmix/minvolfit.hpp"
#include "unmix/nmf.hpp"
#include "unmix/rng.hpp"
#include "unmix/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>
#include <vector>

using namespace unmix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = std::pow(10.0, std::log10(lo) +
                                  (std::log10(hi) - std::log10(lo)) * i / (n - 1.0));
    return g;
}

SynthConfig paper_shape(double snr, bool strict, double p, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.K = 10;
    cfg.N = 25;
    cfg.M = 30;
    cfg.r = 1.0;
    cfg.p = p;
    cfg.is_strict = strict;
    cfg.snr = snr;
    cfg.seed = seed;
    return cfg;
}

double median_of(const std::vector<MedianRow>& rows, const std::string& alg,
                 double hyper, double snr) {
    for (const auto& r : rows)
        if (r.algorithm == alg && r.lambda_or_alpha == hyper && r.snr == snr)
            return r.median_deg;
    return std::numeric_limits<double>::quiet_NaN();
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (int i = 0; i < n; ++i) r[idx[i]] = i + 1.0;
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    return 1.0 - 6.0 * d2 / (n * (static_cast<double>(n) * n - 1.0));
}

// ---------------------------------------------------------------------------
// Criterion 1: noiseless identifiability, strictly tight bags.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
    const double t0 = now_seconds();
    double worst = 0.0;
    for (int b = 0; b < 20; ++b) {
        auto [bag, truth] = generate_bag(paper_shape(kInf, true, 1.0, 1000 + b));
        EPFitConfig cfg;
        cfg.inner.n_iters = 100000;
        cfg.inner.seed = derive_seed(1, b);
        cfg.inner.early_stop_rel_tol = 1e-12;
        cfg.pair_search = PairSearch::exact;
        const Vec f = epfit(bag, cfg);
        worst = std::max(worst, signature_error(f, truth.params.f));
    }
    const double elapsed = now_seconds() - t0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max signature error %.3e deg, %.1f s", worst,
                  elapsed);
    return {worst <= 1e-4 && elapsed <= 120.0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 2: canonical-solution agreement on partially tight bags.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
    double worst = 0.0;
    for (int b = 0; b < 20; ++b) {
        auto [bag, truth] = generate_bag(paper_shape(kInf, false, 1.0, 2000 + b));
        EPFitConfig cfg;
        cfg.inner.n_iters = 1000000;
        cfg.inner.seed = derive_seed(2, b);
        cfg.inner.early_stop_rel_tol = 1e-13;
        cfg.inner.step.eta0 = 4.0;
        cfg.pair_search = PairSearch::exact;
        const Vec f = epfit(bag, cfg);
        const Vec f0 =
            canonical_solution(truth.params.f, tightness_ratios(truth.params.C));
        worst = std::max(worst, signature_error(f, f0));
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "max deviation from f0 %.3e deg", worst);
    return {worst <= 1e-6, buf};
}

// ---------------------------------------------------------------------------
// Criterion 3: Theorem-1 probe over the (c, t, u) box.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
    Rng rng(3);
    long violations = 0;
    for (int rep = 0; rep < 50; ++rep) {
        Vec raw(10);
        for (int i = 0; i < 10; ++i) raw(i) = rng.uniform(0.5, 1.5);
        const Vec f = rescale_straddle(raw);
        const TightnessRatios r{rng.uniform(0.0, 0.95), rng.uniform(0.0, 0.95)};
        const Vec f0 = canonical_solution(f, r);
        const double v0 = volume(f0);
        const CtuBox box = ctu_feasible_box(f, r);
        for (int s = 0; s < 1000; ++s) {
            const double c = rng.uniform(0.05, 10.0);
            const double t = box.t_lo + (box.t_hi - box.t_lo) * rng.uniform01();
            const double u =
                box.u_hi - (box.u_hi - box.u_lo) * rng.uniform01() * (1 - 1e-12);
            if (v0 > volume(ctu_solution(c, t, u, f)) + 1e-10) ++violations;
        }
    }
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%ld violations over 50000 samples", violations);
    return {violations == 0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 4: Lemma-1 two-column test vs full per-patch nonnegativity.
// ---------------------------------------------------------------------------
Outcome criterion_4() {
    Rng rng(4);
    long mismatches = 0, total = 0;
    for (int set = 0; set < 200; ++set) {
        std::vector<CoefMat> C(3);
        Vec f(6);
        for (int i = 0; i < 6; ++i) f(i) = rng.uniform(0.5, 1.5);
        for (auto& c : C) {
            c.resize(2, 4);
            for (int j = 0; j < 4; ++j) {
                c(0, j) = rng.uniform(0.05, 2.0);
                c(1, j) = rng.uniform(0.05, 2.0);
            }
        }
        if (set % 3 == 0) C[0](1, 0) = 0.0;
        if (set % 5 == 0) C[1](0, 2) = 0.0;
        const TightnessRatios r = tightness_ratios(C);
        for (int rep = 0; rep < 200; ++rep) {
            TransformParams T;
            T.alpha = rng.uniform(-1.5, 1.5);
            T.beta = rng.uniform(-1.5, 1.5);
            T.gamma = rng.uniform(-1.5, 1.5);
            T.delta = rng.uniform(-1.5, 1.5);
            const double det = T.det();
            if (det == 0.0) continue;
            bool brute = ((T.alpha * f.array() + T.beta) > 0.0).all() &&
                         ((T.gamma * f.array() + T.delta) > 0.0).all();
            for (const auto& c : C)
                for (int j = 0; j < c.cols() && brute; ++j) {
                    const double top = (T.delta * c(0, j) - T.gamma * c(1, j)) / det;
                    const double bot = (-T.beta * c(0, j) + T.alpha * c(1, j)) / det;
                    if (top < 0.0 || bot < 0.0) brute = false;
                }
            if (feasible_transform_check(T, f, r) != brute) ++mismatches;
            ++total;
        }
    }
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%ld mismatches over %ld cases", mismatches, total);
    return {mismatches == 0, buf};
}

// ---------------------------------------------------------------------------
// Criterion 5: analytic gradients vs central finite differences.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
    double worst_rel = 0.0;
    bool k_positive = true;
    const double h = 1e-6;

    for (int inst = 0; inst < 20; ++inst) {
        SynthConfig dc;
        dc.K = 3;
        dc.N = 5;
        dc.M = 6;
        dc.snr = 1e2;
        dc.seed = 500 + inst;
        auto [bag, truth] = generate_bag(dc);
        const ModelParams& p = truth.params;
        const double lambda = 1e-3;

        const Vec gf = block_gradient_f(bag, p, lambda);
        double scale = std::max(gf.lpNorm<Eigen::Infinity>(), 1e-6);
        for (int i = 0; i < p.f.size(); ++i) {
            ModelParams hi = p, lo = p;
            hi.f(i) += h;
            lo.f(i) -= h;
            const double fd =
                (objective_g(bag, hi, lambda) - objective_g(bag, lo, lambda)) / (2 * h);
            worst_rel = std::max(worst_rel, std::abs(gf(i) - fd) / scale);
        }
        for (int k = 0; k < bag.count(); ++k) {
            const CoefMat gc = block_gradient_C(bag, p, k);
            scale = std::max(gc.lpNorm<Eigen::Infinity>(), 1e-6);
            for (int j = 0; j < gc.cols(); ++j)
                for (int i = 0; i < 2; ++i) {
                    ModelParams hi = p, lo = p;
                    hi.C[k](i, j) += h;
                    lo.C[k](i, j) -= h;
                    const double fd = (objective_g(bag, hi, lambda) -
                                       objective_g(bag, lo, lambda)) /
                                      (2 * h);
                    worst_rel = std::max(worst_rel, std::abs(gc(i, j) - fd) / scale);
                }
            const Vec gv = block_gradient_v(bag, p, k);
            scale = std::max(gv.lpNorm<Eigen::Infinity>(), 1e-6);
            for (int i = 0; i < p.f.size(); ++i) {
                ModelParams hi = p, lo = p;
                hi.v[k](i) += h;
                lo.v[k](i) -= h;
                const double fd = (objective_g(bag, hi, lambda) -
                                   objective_g(bag, lo, lambda)) /
                                  (2 * h);
                worst_rel = std::max(worst_rel, std::abs(gv(i) - fd) / scale);
            }
        }
    }

    Rng rng(5);
    for (int inst = 0; inst < 20; ++inst) {
        Vec raw(8);
        for (int i = 0; i < 8; ++i) raw(i) = rng.uniform(0.5, 1.5);
        const Vec f = rescale_straddle(raw);
        const TightnessRatios r{rng.uniform(0.0, 0.6), rng.uniform(0.0, 0.6)};
        const CtuBox box = ctu_feasible_box(f, r);
        const double c = rng.uniform(0.5, 2.0);
        const double t = box.t_lo + (box.t_hi - box.t_lo) * rng.uniform(0.1, 0.9);
        const double u = box.u_lo + (box.u_hi - box.u_lo) * rng.uniform(0.1, 0.9);
        const CtuGradient g = minvol_gradient_ctu(c, t, u, f);
        if (!(g.K1 > 0.0) || !(g.K2 > 0.0)) k_positive = false;
        auto J = [&](double cc, double tt, double uu) {
            const Vec s = ctu_solution(cc, tt, uu, f);
            return s.sum() / s.norm();
        };
        const double scale =
            std::max({std::abs(g.grad(1)), std::abs(g.grad(2)), 1e-6});
        const double dt = (J(c, t + h, u) - J(c, t - h, u)) / (2 * h);
        const double du = (J(c, t, u + h) - J(c, t, u - h)) / (2 * h);
        worst_rel = std::max(worst_rel, std::abs(g.grad(1) - dt) / scale);
        worst_rel = std::max(worst_rel, std::abs(g.grad(2) - du) / scale);
        worst_rel = std::max(worst_rel, std::abs(g.grad(0)) / scale);
    }

    char buf[100];
    std::snprintf(buf, sizeof(buf), "max relative error %.3e, K1/K2 positive: %s",
                  worst_rel, k_positive ? "yes" : "no");
    return {worst_rel <= 1e-5 && k_positive, buf};
}

// ---------------------------------------------------------------------------
// Criterion 6: descent, feasibility, and noiseless residual.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
    bool monotone = true, feasible = true;
    for (int b = 0; b < 50; ++b) {
        auto [bag, truth] = generate_bag(paper_shape(1e3, true, 0.5, 6000 + b));
        MinVolConfig cfg;
        cfg.lambda = 1e-4;
        cfg.n_iters = 300;
        cfg.seed = derive_seed(6, b);
        cfg.skip_rank_check = true;
        cfg.on_sweep = [&](const ModelParams& p, long) {
            if ((p.f.array() < 0.0).any() || std::abs(p.f.norm() - 1.0) > 1e-12)
                feasible = false;
            for (const auto& v : p.v)
                if ((v.array() < 0.0).any() || std::abs(v.norm() - 1.0) > 1e-12)
                    feasible = false;
            for (const auto& c : p.C)
                if ((c.array() < 0.0).any()) feasible = false;
        };
        const FitResult r = minvolfit(bag, cfg);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
            if (r.objective_trace[i] > r.objective_trace[i - 1] + 1e-12)
                monotone = false;
    }

    double worst_resid = 0.0;
    for (int b = 0; b < 5; ++b) {
        auto [bag, truth] = generate_bag(paper_shape(kInf, true, 1.0, 6600 + b));
        const double norm2 = bag.squared_norm();
        double best = kInf;
        for (int s = 0; s < 5 && best > 1e-8; ++s) {
            MinVolConfig cfg;
            cfg.lambda = 0.0;
            cfg.n_iters = 100000;
            cfg.seed = derive_seed(66, b, s);
            cfg.early_stop_rel_tol = 1e-12;
            best = std::min(best, minvolfit(bag, cfg).final_residual / norm2);
        }
        worst_resid = std::max(worst_resid, best);
    }

    char buf[140];
    std::snprintf(buf, sizeof(buf),
                  "monotone: %s, feasible: %s, worst noiseless rel residual %.3e",
                  monotone ? "yes" : "no", feasible ? "yes" : "no", worst_resid);
    return {monotone && feasible && worst_resid <= 1e-8, buf};
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8 share one sweep protocol run.
// ---------------------------------------------------------------------------
struct SweepOutputs {
    std::vector<double> snr_grid;
    SweepResult epfit_full;     // epfit across the full SNR grid
    double epfit_seconds = 0.0;
    SweepResult top3;           // epfit + minvolnmf at the top three SNRs
    bool ran = false;
};

SweepOutputs g_sweep78;

void run_sweep78() {
    if (g_sweep78.ran) return;
    g_sweep78.snr_grid = log_grid(1e2, 1e6, 10);

    RunConfig base;
    base.seed = 78;
    base.bags = 20;
    base.patches_per_bag = 10;
    base.pixels_per_patch = 25;
    base.bands = 30;
    base.r = 1.0;
    base.p = 0.5;
    base.is_strict = true;
    base.jobs = 1;

    AlgorithmSpec ep;
    ep.name = "epfit";
    ep.n_iters = 20000;
    ep.early_stop_rel_tol = 1e-11;

    RunConfig full = base;
    full.snr = g_sweep78.snr_grid;
    full.algorithms = {ep};
    const double t0 = now_seconds();
    g_sweep78.epfit_full = run_sweep(full);
    g_sweep78.epfit_seconds = now_seconds() - t0;

    AlgorithmSpec nmf;
    nmf.name = "minvolnmf";
    nmf.lambdas = log_grid(1e-2, 1e0, 7);
    nmf.delta = 0.1;
    nmf.n_iters = 10000;
    nmf.early_stop_rel_tol = 1e-12;

    RunConfig top3 = base;
    top3.snr = {g_sweep78.snr_grid[7], g_sweep78.snr_grid[8], g_sweep78.snr_grid[9]};
    top3.algorithms = {ep, nmf};
    g_sweep78.top3 = run_sweep(top3);
    g_sweep78.ran = true;
}

Outcome criterion_7() {
    run_sweep78();
    if (!g_sweep78.epfit_full.failures.empty())
        return {false, "sweep cells failed"};
    std::vector<double> medians;
    for (double snr : g_sweep78.snr_grid)
        medians.push_back(median_of(g_sweep78.epfit_full.medians, "epfit", 0.0, snr));
    const double rho = spearman(g_sweep78.snr_grid, medians);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "spearman rho %.3f, runtime %.1f s", rho,
                  g_sweep78.epfit_seconds);
    return {rho <= -0.9 && g_sweep78.epfit_seconds <= 1800.0, buf};
}

Outcome criterion_8() {
    run_sweep78();
    if (!g_sweep78.top3.failures.empty()) return {false, "sweep cells failed"};
    const auto& medians = g_sweep78.top3.medians;
    const std::vector<double> lams = log_grid(1e-2, 1e0, 7);
    const double top_snr = g_sweep78.snr_grid[9];

    // Benchmark lambda: smallest median at the top SNR.
    double best_lam = lams[0], best_med = kInf;
    for (double lam : lams) {
        const double m = median_of(medians, "minvolnmf", lam, top_snr);
        if (m < best_med) {
            best_med = m;
            best_lam = lam;
        }
    }
    const double ep_top = median_of(medians, "epfit", 0.0, top_snr);
    const bool gap = best_med >= 2.0 * ep_top;

    double nmf7 = median_of(medians, "minvolnmf", best_lam, g_sweep78.snr_grid[7]);
    double nmf8 = median_of(medians, "minvolnmf", best_lam, g_sweep78.snr_grid[8]);
    double nmf9 = best_med;
    const double lo = std::min({nmf7, nmf8, nmf9});
    const double hi = std::max({nmf7, nmf8, nmf9});
    const bool plateau = (hi - lo) / hi < 0.25;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "benchmark lambda %.3g: medians (%.3f, %.3f, %.3f) deg vs epfit %.4f "
                  "deg at top SNR; gap %.1fx, plateau spread %.1f%%",
                  best_lam, nmf7, nmf8, nmf9, ep_top, best_med / ep_top,
                  100.0 * (hi - lo) / hi);
    return {gap && plateau, buf};
}

// ---------------------------------------------------------------------------
// Criterion 9: MinVolFit lower envelope at SNR 1e3, 1e4, 1e5.
// ---------------------------------------------------------------------------
Outcome criterion_9() {
    RunConfig cfg;
    cfg.seed = 9;
    cfg.bags = 20;
    cfg.patches_per_bag = 10;
    cfg.pixels_per_patch = 25;
    cfg.bands = 30;
    cfg.r = 1.0;
    cfg.p = 0.5;
    cfg.is_strict = true;
    cfg.snr = {1e3, 1e4, 1e5};
    cfg.jobs = 1;

    AlgorithmSpec ep;
    ep.name = "epfit";
    ep.n_iters = 20000;
    ep.early_stop_rel_tol = 1e-11;

    AlgorithmSpec mv;
    mv.name = "minvolfit";
    mv.lambdas = log_grid(1e-5, 1e-3, 7);
    mv.n_iters = 30000;
    mv.early_stop_rel_tol = 1e-11;

    cfg.algorithms = {ep, mv};
    const SweepResult res = run_sweep(cfg);
    if (!res.failures.empty()) return {false, "sweep cells failed"};

    bool ok = true;
    std::string detail;
    for (double snr : cfg.snr) {
        const double ep_med = median_of(res.medians, "epfit", 0.0, snr);
        double best = kInf;
        for (double lam : mv.lambdas)
            best = std::min(best, median_of(res.medians, "minvolfit", lam, snr));
        char buf[90];
        std::snprintf(buf, sizeof(buf), "[snr %.0e: minvolfit %.4f vs epfit %.4f] ",
                      snr, best, ep_med);
        detail += buf;
        if (!(best <= ep_med)) ok = false;
    }
    return {ok, detail};
}

// ---------------------------------------------------------------------------
// Criterion 10: angular difference equals the nMSE route.
// ---------------------------------------------------------------------------
Outcome criterion_10() {
    Rng rng(10);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        Vec u(12), v(12);
        for (int i = 0; i < 12; ++i) u(i) = rng.uniform(0.05, 2.0);
        for (int i = 0; i < 12; ++i) v(i) = rng.uniform(0.05, 2.0);
        worst = std::max(worst,
                         std::abs(angular_difference(u, v) - angle_from_nmse(nmse(u, v))));
    }
    char buf[80];
    std::snprintf(buf, sizeof(buf), "max route difference %.3e deg", worst);
    return {worst <= 1e-9, buf};
}

// ---------------------------------------------------------------------------
// Criterion 11: oracle round trip and the patch sampler filter.
// ---------------------------------------------------------------------------
Outcome criterion_11() {
    Rng rng(11);
    // Dyadic entries so the float32 cube payload is exact.
    auto dyadic = [&](int m, double lo, double hi) {
        Vec x(m);
        for (int i = 0; i < m; ++i)
            x(i) = std::max(1.0, std::round(rng.uniform(lo, hi) * 32.0)) / 32.0;
        return x;
    };
    const Vec background = dyadic(10, 0.5, 1.5);
    const Vec f = dyadic(10, 0.6, 1.8);
    LabeledCube cube;
    cube.width = 8;
    cube.height = 8;
    cube.bands = 10;
    cube.label_names = {"background"};
    cube.image.resize(8 * 8 * 10);
    cube.labels.assign(64, 0);
    cube.foreground.assign(64, 0);
    for (long p = 0; p < 64; ++p) {
        const bool fg = p % 5 == 0;
        cube.foreground[p] = fg ? 1 : 0;
        for (int b = 0; b < 10; ++b)
            cube.image[p * 10 + b] =
                static_cast<float>(fg ? background(b) * f(b) : background(b));
    }
    const OracleResult oracle = oracle_reference(cube, 10.0, 10);
    const double oracle_err = angular_difference(oracle.f_ref, f);

    // Two-background cube: the sampler must discard exactly the straddling
    // windows found by brute force.
    LabeledCube two = cube;
    for (int y = 0; y < 8; ++y)
        for (int x = 5; x < 8; ++x) two.labels[y * 8 + x] = 1;
    SampleStats stats;
    sample_patches(two, 3, 1, &stats);
    long pure = 0, straddle = 0;
    for (int y0 = 0; y0 + 3 <= 8; ++y0)
        for (int x0 = 0; x0 + 3 <= 8; ++x0) {
            bool same = true;
            for (int dy = 0; dy < 3; ++dy)
                for (int dx = 0; dx < 3; ++dx)
                    same &= two.labels[(y0 + dy) * 8 + (x0 + dx)] ==
                            two.labels[y0 * 8 + x0];
            (same ? pure : straddle) += 1;
        }
    const bool sampler_ok = stats.kept == pure && stats.discarded == straddle;

    char buf[140];
    std::snprintf(buf, sizeof(buf),
                  "oracle error %.3e deg; sampler kept %ld/%ld discarded %ld/%ld",
                  oracle_err, stats.kept, pure, stats.discarded, straddle);
    return {oracle_err <= 1e-8 && sampler_ok, buf};
}

// ---------------------------------------------------------------------------
// Criterion 12: per-sweep scaling when total pixels double.
// ---------------------------------------------------------------------------
Outcome criterion_12() {
    const auto rows = wallclock_scaling_probe(
        {{10, 60, 40}, {10, 120, 40}, {20, 60, 40}}, 300, 5, 12);
    const double n_ratio = rows[1].sec_per_sweep / rows[0].sec_per_sweep;
    const double k_ratio = rows[2].sec_per_sweep / rows[0].sec_per_sweep;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "pixel-doubling ratios: N-grown %.2fx, K-grown %.2fx (band [1.5, 3])",
                  n_ratio, k_ratio);
    const auto in_band = [](double r) { return r >= 1.5 && r <= 3.0; };
    return {in_band(n_ratio) && in_band(k_ratio), buf};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    struct Entry {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "noiseless identifiability (EPFit, strictly tight)", criterion_1},
        {2, "canonical-solution agreement (partial tightness)", criterion_2},
        {3, "Theorem-1 probe over the (c,t,u) box", criterion_3},
        {4, "Lemma-1 two-column equivalence", criterion_4},
        {5, "gradient finite-difference checks", criterion_5},
        {6, "MinVolFit descent, feasibility, noiseless residual", criterion_6},
        {7, "EPFit error decreases with SNR", criterion_7},
        {8, "benchmark NMF plateau and gap", criterion_8},
        {9, "MinVolFit lower envelope", criterion_9},
        {10, "metric identity (angle vs nMSE route)", criterion_10},
        {11, "oracle round trip and sampler filter", criterion_11},
        {12, "per-sweep scaling probe", criterion_12},
    };

    int failures = 0;
    for (const auto& e : entries) {
        if (!only.empty() && !only.count(e.id)) continue;
        const double t0 = now_seconds();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double dt = now_seconds() - t0;
        std::printf("criterion %2d: %s  %s (%s) [%.1f s]\n", e.id,
                    out.pass ? "PASS" : "FAIL", e.name, out.detail.c_str(), dt);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
