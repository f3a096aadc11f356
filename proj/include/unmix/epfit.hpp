#pragma once

#include "unmix/minvolfit.hpp"

#include <utility>
#include <vector>

namespace unmix {

enum class PairSearch { exact, greedy };

struct EPFitConfig {
    MinVolConfig inner;          // lambda is forced to 0 by epfit
    int removal_count = 0;       // columns removed per extreme side
    PairSearch pair_search = PairSearch::exact;
    double ratio_floor = 1e-9;

    EPFitConfig() { inner.n_iters = 50000; }  // paper default for the inner fit
};

/// Concatenation of diag(v_est^(k))^-1 Y^(k) with column provenance.
struct ConcatColumns {
    Mat data;                                  // M x N_total
    std::vector<std::pair<int, int>> origin;   // (patch k, within-patch index)
    long flooring_events = 0;
};

/// Divides every patch by its estimated background-illumination signature
/// (entries floored at `ratio_floor`) and concatenates in patch order.
ConcatColumns normalized_concat(const PatchSet& bag, const std::vector<Vec>& v_est,
                                double ratio_floor = 1e-9);

/// Noisy endpoint removal: projects onto the rank-2 basis, orders columns by
/// coefficient ratio, and drops `removal_count` columns from each extreme.
Mat endpoint_prune(const Mat& ytilde, int removal_count);

/// Elementwise ratio of the minimum-cosine column pair (floored); standalone
/// entry point for data that is already background-normalized.
Vec endpoint_pair_solution(const Mat& ytilde, PairSearch mode,
                           double ratio_floor = 1e-9);

struct EPFitDiagnostics {
    FitResult inner;
    long flooring_events = 0;
    int pair_i = -1, pair_j = -1;
    double pair_cosine = 1.0;
};

/// Algorithm: fit backgrounds with lambda = 0, normalize and concatenate,
/// optionally prune noisy endpoints, then return the elementwise ratio of the
/// minimum-cosine pair.
Vec epfit(const PatchSet& bag, const EPFitConfig& cfg,
          EPFitDiagnostics* diag = nullptr);

}  // namespace unmix
