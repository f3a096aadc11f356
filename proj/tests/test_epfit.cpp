#include "unmix/datagen.hpp"
#include "unmix/epfit.hpp"
#include "unmix/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace unmix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<PatchSet, GroundTruth> small_bag(std::uint64_t seed, bool strict, double p,
                                           int K = 4, int N = 10, int M = 8) {
    SynthConfig cfg;
    cfg.K = K;
    cfg.N = N;
    cfg.M = M;
    cfg.r = 1.0;
    cfg.p = p;
    cfg.is_strict = strict;
    cfg.snr = kInf;
    cfg.seed = seed;
    return generate_bag(cfg);
}

EPFitConfig fast_config(std::uint64_t seed) {
    EPFitConfig cfg;
    cfg.inner.n_iters = 200000;
    cfg.inner.seed = seed;
    cfg.inner.early_stop_rel_tol = 1e-12;
    cfg.inner.n_starts = 2;
    return cfg;
}

Vec random_positive(Rng& rng, int m, double lo = 0.5, double hi = 1.5) {
    Vec x(m);
    for (int i = 0; i < m; ++i) x(i) = rng.uniform(lo, hi);
    return x;
}

}  // namespace

// ============================================================================
// normalized_concat
// ============================================================================

TEST_CASE("normalized_concat with unit backgrounds is the plain concatenation") {
    auto [bag, truth] = small_bag(1, true, 1.0);
    std::vector<Vec> ones(bag.count(), Vec::Ones(bag.bands()));
    const ConcatColumns c = normalized_concat(bag, ones);
    CHECK(c.data.cols() == bag.total_pixels());
    CHECK(c.flooring_events == 0);
    CHECK((c.data.leftCols(bag.patches[0].pixels()) - bag.patches[0].data).norm() == 0.0);
    CHECK(c.origin.front() == std::pair<int, int>{0, 0});
    CHECK(c.origin.back() == std::pair<int, int>{bag.count() - 1,
                                                 bag.patches.back().pixels() - 1});
}

TEST_CASE("normalized_concat with the true backgrounds lands in span{f, 1}") {
    auto [bag, truth] = small_bag(2, true, 1.0);
    const ConcatColumns c = normalized_concat(bag, truth.params.v);
    Mat basis(bag.bands(), 2);
    basis.col(0) = truth.params.f;
    basis.col(1).setOnes();
    const Mat coef = ls_coefficients(basis, c.data);
    CHECK((c.data - basis * coef).norm() <= 1e-10 * c.data.norm());
}

TEST_CASE("normalized_concat with a scalar background halves columns") {
    auto [bag, truth] = small_bag(3, true, 1.0, 1);
    std::vector<Vec> twos = {Vec::Constant(bag.bands(), 2.0)};
    const ConcatColumns c = normalized_concat(bag, twos);
    CHECK((c.data * 2.0 - bag.patches[0].data).norm() <= 1e-14 * bag.patches[0].data.norm());
}

// ============================================================================
// endpoint_prune
// ============================================================================

TEST_CASE("endpoint_prune with zero removals is the identity") {
    auto [bag, truth] = small_bag(4, true, 1.0);
    const ConcatColumns c = normalized_concat(bag, truth.params.v);
    CHECK((endpoint_prune(c.data, 0) - c.data).norm() == 0.0);
}

TEST_CASE("endpoint_prune removes injected outliers beyond the extremes") {
    Rng rng(5);
    const int m = 8;
    const Vec f = random_positive(rng, m, 0.6, 1.8);
    const Vec ones = Vec::Ones(m);
    Mat cols(m, 24);
    // Interior cone columns between f and 1.
    for (int j = 0; j < 20; ++j) {
        const double a = rng.uniform(0.2, 0.8);
        cols.col(j) = (a * f + (1.0 - a) * ones) * rng.uniform(0.5, 2.0);
    }
    // Two outliers per side, beyond the cone extremes.
    cols.col(20) = f * 1.3 - ones * 0.25;
    cols.col(21) = f * 1.7 - ones * 0.6;
    cols.col(22) = ones * 1.3 - f * 0.22;
    cols.col(23) = ones * 1.8 - f * 0.55;
    REQUIRE((cols.array() > 0.0).all());  // keep the test inside the model's domain
    const Mat pruned = endpoint_prune(cols, 2);
    CHECK(pruned.cols() == 20);
    // Every survivor must be one of the interior columns.
    for (int j = 0; j < pruned.cols(); ++j) {
        double best = 1e300;
        for (int s = 0; s < 20; ++s)
            best = std::min(best, (pruned.col(j) - cols.col(s)).norm());
        CHECK(best == 0.0);
    }
}

TEST_CASE("endpoint_prune boundary precondition") {
    Mat six = Mat::Random(4, 6).array() + 2.0;
    CHECK_THROWS_AS(endpoint_prune(six, 2), InvalidInputError);
    Mat nine = Mat::Random(4, 9).array() + 2.0;
    CHECK_NOTHROW(endpoint_prune(nine, 2));
}

// ============================================================================
// endpoint_pair_solution
// ============================================================================

TEST_CASE("endpoint_pair_solution on a hand-built 3 column instance") {
    Vec f(3);
    f << 2, 1, 0.5;
    Mat cols(3, 3);
    cols.col(0) = f;
    cols.col(1) = Vec::Ones(3);
    cols.col(2) = 0.5 * f + 0.5 * Vec::Ones(3);
    const Vec got = endpoint_pair_solution(cols, PairSearch::exact);
    const double direct = angular_difference(got, f);
    const double inverse = angular_difference(got.cwiseInverse(), f);
    CHECK(std::min(direct, inverse) <= 1e-10);
}

TEST_CASE("endpoint_pair_solution of two orthogonal columns is their ratio") {
    Mat cols(3, 2);
    cols.col(0) << 2, 1, 1e-12;
    cols.col(1) << 1e-12, 1, 2;
    const Vec got = endpoint_pair_solution(cols, PairSearch::exact, 1e-9);
    const Vec expected =
        cols.col(0).cwiseQuotient(cols.col(1).cwiseMax(1e-9)).cwiseMax(1e-9);
    CHECK((got - expected).norm() == 0.0);
}

TEST_CASE("endpoint_pair_solution ignores duplicated extremes") {
    Rng rng(6);
    const int m = 6;
    const Vec f = random_positive(rng, m, 0.6, 1.8);
    const Vec ones = Vec::Ones(m);
    Mat cols(m, 8);
    cols.col(0) = f;
    cols.col(1) = ones;
    cols.col(2) = 2.0 * f;   // duplicated extreme, different scale
    cols.col(3) = 0.5 * ones;
    for (int j = 4; j < 8; ++j) {
        const double a = rng.uniform(0.2, 0.8);
        cols.col(j) = a * f + (1.0 - a) * ones;
    }
    const Vec with_dups = endpoint_pair_solution(cols, PairSearch::exact);
    const Vec without = endpoint_pair_solution(cols.leftCols(2), PairSearch::exact);
    CHECK(signature_error(with_dups, without) <= 1e-10);
}

// ============================================================================
// epfit end to end
// ============================================================================

TEST_CASE("epfit recovers f on noiseless strictly tight bags") {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        auto [bag, truth] = small_bag(seed * 31, true, 1.0);
        const Vec f = epfit(bag, fast_config(seed));
        CHECK(signature_error(f, truth.params.f) <= 1e-4);
    }
}

TEST_CASE("epfit matches the canonical solution on partially tight bags") {
    auto [bag, truth] = small_bag(77, false, 0.5);
    const Vec f = epfit(bag, fast_config(5));
    const TightnessRatios r = tightness_ratios(truth.params.C);
    const Vec f0 = canonical_solution(truth.params.f, r);
    CHECK(signature_error(f, f0) <= 1e-4);
}

TEST_CASE("pair ratio is invariant to positive per-pixel rescaling") {
    // Scale invariance holds exactly at the pair-search level: cosine ignores
    // column scale and the ratio changes only by a positive scalar.
    auto [bag, truth] = small_bag(9, true, 1.0);
    const ConcatColumns base = normalized_concat(bag, truth.params.v);
    Mat scaled = base.data;
    scaled.col(3) *= 2.5;
    scaled.col(17) *= 0.4;
    const Vec a = endpoint_pair_solution(base.data, PairSearch::exact);
    const Vec b = endpoint_pair_solution(scaled, PairSearch::exact);
    CHECK(signature_error(a, b) <= 1e-10);
}

TEST_CASE("epfit survives per-pixel rescaling end to end") {
    auto [bag, truth] = small_bag(9, true, 1.0);
    EPFitConfig cfg = fast_config(7);
    PatchSet scaled = bag;
    scaled.patches[1].data.col(3) *= 2.5;
    scaled.patches[2].data.col(0) *= 0.4;
    const Vec rescaled = epfit(scaled, cfg);
    CHECK(signature_error(rescaled, truth.params.f) <= 1e-4);
}

TEST_CASE("epfit endpoint-fit certificate on noiseless data") {
    auto [bag, truth] = small_bag(10, true, 1.0);
    EPFitConfig cfg = fast_config(3);
    EPFitDiagnostics diag;
    const Vec fstar = epfit(bag, cfg, &diag);
    const ConcatColumns c = normalized_concat(bag, diag.inner.params.v, cfg.ratio_floor);
    Mat basis(bag.bands(), 2);
    basis.col(0) = fstar;
    basis.col(1).setOnes();
    const Mat coef = ls_coefficients(basis, c.data);
    // Definition of an endpoint fit: one near-(x, 0) column and one
    // near-(0, y) column with positive leads.
    bool has_x0 = false, has_0y = false;
    for (int j = 0; j < coef.cols(); ++j) {
        const double scale = c.data.col(j).norm();
        if (coef(0, j) > 0.0 && std::abs(coef(1, j)) <= 1e-6 * scale) has_x0 = true;
        if (coef(1, j) > 0.0 && std::abs(coef(0, j)) <= 1e-6 * scale) has_0y = true;
    }
    CHECK(has_x0);
    CHECK(has_0y);
}

TEST_CASE("epfit exact pair cosine lower-bounds greedy") {
    auto [bag, truth] = small_bag(11, true, 1.0);
    EPFitConfig exact_cfg = fast_config(2);
    EPFitConfig greedy_cfg = exact_cfg;
    greedy_cfg.pair_search = PairSearch::greedy;
    EPFitDiagnostics de, dg;
    epfit(bag, exact_cfg, &de);
    epfit(bag, greedy_cfg, &dg);
    CHECK(de.pair_cosine <= dg.pair_cosine + 1e-15);
}

TEST_CASE("epfit rejects a degenerate cone") {
    // One patch whose pixels are all the same direction: every normalized
    // pair has cosine 1, whatever backgrounds the inner fit lands on.
    Patch patch;
    patch.data.resize(6, 5);
    Vec base(6);
    base << 1, 2, 3, 2, 1, 2;
    for (int j = 0; j < 5; ++j) patch.data.col(j) = (0.5 + j) * base;
    PatchSet bag;
    bag.patches = {patch};
    EPFitConfig cfg;
    cfg.inner.n_iters = 200;
    cfg.inner.skip_rank_check = true;
    CHECK_THROWS_AS(epfit(bag, cfg), DegenerateConeError);
}
