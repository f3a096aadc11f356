#include "unmix/epfit.hpp"

#include <algorithm>
#include <numeric>

namespace unmix {

ConcatColumns normalized_concat(const PatchSet& bag, const std::vector<Vec>& v_est,
                                double ratio_floor) {
    if (static_cast<int>(v_est.size()) != bag.count())
        throw DimensionError("normalized_concat: v_est length mismatch");
    if (ratio_floor <= 0.0)
        throw InvalidInputError("normalized_concat: ratio_floor must be positive");
    ConcatColumns out;
    out.data.resize(bag.bands(), bag.total_pixels());
    out.origin.reserve(static_cast<std::size_t>(bag.total_pixels()));
    long col = 0;
    for (int k = 0; k < bag.count(); ++k) {
        if (v_est[k].size() != bag.bands())
            throw DimensionError("normalized_concat: v_est size mismatch at patch " +
                                 std::to_string(k));
        Vec v = v_est[k];
        for (int i = 0; i < v.size(); ++i) {
            if (v(i) < ratio_floor) {
                v(i) = ratio_floor;
                ++out.flooring_events;
            }
        }
        const Mat& Y = bag.patches[k].data;
        for (int j = 0; j < Y.cols(); ++j, ++col) {
            out.data.col(col) = Y.col(j).cwiseQuotient(v);
            out.origin.emplace_back(k, j);
        }
    }
    return out;
}

Mat endpoint_prune(const Mat& ytilde, int removal_count) {
    if (removal_count < 0)
        throw InvalidInputError("endpoint_prune: removal_count must be >= 0");
    if (removal_count == 0) return ytilde;
    const int n = static_cast<int>(ytilde.cols());
    if (n <= 4 * removal_count)
        throw InvalidInputError("endpoint_prune: too few columns for removal_count " +
                                std::to_string(removal_count));
    const Mat V = rank2_basis(ytilde);
    const Mat C = ls_coefficients(V, ytilde);
    // Ratio of second coefficient over first. The first basis vector is
    // sign-fixed toward the data (nonnegative mean), so row 1 stays positive
    // on cone data and the ratio orders columns monotonically by cone angle
    // without wrapping through +-inf.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> ratio(n);
    for (int j = 0; j < n; ++j)
        ratio[j] = C(1, j) / C(0, j);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ratio[a] < ratio[b]; });
    std::vector<bool> keep(n, true);
    for (int s = 0; s < removal_count; ++s) {
        keep[order[s]] = false;
        keep[order[n - 1 - s]] = false;
    }
    Mat out(ytilde.rows(), n - 2 * removal_count);
    int col = 0;
    for (int j = 0; j < n; ++j)
        if (keep[j]) out.col(col++) = ytilde.col(j);
    return out;
}

namespace {

Vec floored_ratio(const Vec& u1, const Vec& u2, double floor) {
    Vec f = u1.cwiseQuotient(u2.cwiseMax(floor));
    return f.cwiseMax(floor);
}

}  // namespace

Vec endpoint_pair_solution(const Mat& ytilde, PairSearch mode, double ratio_floor) {
    const auto [i, j] = (mode == PairSearch::exact) ? min_cosine_pair_exact(ytilde)
                                                    : min_cosine_pair_greedy(ytilde);
    return floored_ratio(ytilde.col(i), ytilde.col(j), ratio_floor);
}

Vec epfit(const PatchSet& bag, const EPFitConfig& cfg, EPFitDiagnostics* diag) {
    bag.validate(-1.0);
    MinVolConfig inner = cfg.inner;
    inner.lambda = 0.0;
    FitResult fit = minvolfit_multistart(bag, inner);

    ConcatColumns concat = normalized_concat(bag, fit.params.v, cfg.ratio_floor);
    Mat cols = (cfg.removal_count > 0) ? endpoint_prune(concat.data, cfg.removal_count)
                                       : std::move(concat.data);

    const auto [i, j] = (cfg.pair_search == PairSearch::exact)
                            ? min_cosine_pair_exact(cols)
                            : min_cosine_pair_greedy(cols);
    const double pair_cos = cosine(cols.col(i), cols.col(j));
    if (diag) {
        diag->inner = std::move(fit);
        diag->flooring_events = concat.flooring_events;
        diag->pair_i = i;
        diag->pair_j = j;
        diag->pair_cosine = pair_cos;
    }
    if (pair_cos >= 1.0 - 1e-12)
        throw DegenerateConeError("epfit: minimum-cosine pair is degenerate");
    return floored_ratio(cols.col(i), cols.col(j), cfg.ratio_floor);
}

}  // namespace unmix
