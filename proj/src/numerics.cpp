#include "unmix/numerics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unmix {

// ============================================================================
// Projections
// ============================================================================

Vec project_nonneg(const Vec& y) { return y.cwiseMax(0.0); }

Vec project_unit_nonneg(const Vec& y) {
    if (y.size() < 1) throw DimensionError("project_unit_nonneg: empty vector");
    if ((y.array() > 0.0).any()) {
        Vec p = y.cwiseMax(0.0);
        return p / p.norm();
    }
    int best = 0;
    for (int i = 1; i < y.size(); ++i)
        if (std::abs(y(i)) < std::abs(y(best))) best = i;
    Vec e = Vec::Zero(y.size());
    e(best) = 1.0;
    return e;
}

// ============================================================================
// Backtracking line search
// ============================================================================

StepResult backtrack_step(const std::function<double(const Vec&)>& value_fn,
                          const Vec& grad, const Vec& x,
                          const std::function<Vec(const Vec&)>& project,
                          const StepControl& ctrl) {
    const double f0 = value_fn(x);
    if (!std::isfinite(f0))
        throw NumericError("backtrack_step: objective not finite at x", 0);
    const double g2 = grad.squaredNorm();
    double eta = ctrl.eta0;
    for (int j = 0; j <= ctrl.max_backtracks; ++j, eta *= ctrl.shrink) {
        const Vec raw = x - eta * grad;
        Vec cand = project(raw);
        const bool identity = (cand - raw).lpNorm<Eigen::Infinity>() == 0.0;
        const double bound = identity ? f0 - ctrl.armijo_c * eta * g2 : f0;
        const double fc = value_fn(cand);
        if (std::isfinite(fc) && fc <= bound) {
            if ((cand - x).lpNorm<Eigen::Infinity>() == 0.0) return {x, 0.0};
            return {std::move(cand), eta};
        }
    }
    return {x, 0.0};
}

// ============================================================================
// Rank-2 tools
// ============================================================================

Mat rank2_basis(const Mat& A) {
    if (A.cols() < 2) throw DimensionError("rank2_basis: needs at least 2 columns");
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
    Mat V = svd.matrixU().leftCols(2);
    for (int c = 0; c < 2; ++c)
        if (V.col(c).sum() < 0.0) V.col(c) = -V.col(c);
    return V;
}

Mat ls_coefficients(const Mat& V, const Mat& A) {
    if (V.rows() != A.rows())
        throw DimensionError("ls_coefficients: row count mismatch");
    Eigen::JacobiSVD<Mat> svd(V);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * sv(0))
        throw SingularTransformError("ls_coefficients: rank-deficient basis");
    // Normal equations; V is 2 columns so this is a 2x2 solve.
    return (V.transpose() * V).ldlt().solve(V.transpose() * A);
}

// ============================================================================
// Cosine pair searches
// ============================================================================

double cosine(const Vec& u, const Vec& v) {
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero vector");
    return u.dot(v) / (nu * nv);
}

namespace {

struct PairBest {
    double cos = std::numeric_limits<double>::infinity();
    int i = -1, j = -1;

    void consider(double c, int a, int b) {
        if (c < cos || (c == cos && (a < i || (a == i && b < j)))) {
            cos = c;
            i = a;
            j = b;
        }
    }
};

Vec column_norms_checked(const Mat& columns) {
    if (columns.cols() < 2)
        throw DimensionError("min_cosine_pair: needs at least 2 columns");
    Vec norms = columns.colwise().norm();
    for (int j = 0; j < norms.size(); ++j)
        if (norms(j) == 0.0) throw DomainError("min_cosine_pair: zero column");
    return norms;
}

}  // namespace

std::pair<int, int> min_cosine_pair_exact_serial(const Mat& columns) {
    const Vec norms = column_norms_checked(columns);
    const int n = static_cast<int>(columns.cols());
    PairBest best;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            best.consider(columns.col(i).dot(columns.col(j)) / (norms(i) * norms(j)), i, j);
    return {best.i, best.j};
}

std::pair<int, int> min_cosine_pair_exact(const Mat& columns) {
    const Vec norms = column_norms_checked(columns);
    const int n = static_cast<int>(columns.cols());
    std::vector<PairBest> row_best(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
        PairBest b;
        for (int j = i + 1; j < n; ++j)
            b.consider(columns.col(i).dot(columns.col(j)) / (norms(i) * norms(j)), i, j);
        row_best[i] = b;
    }
    PairBest best;
    for (int i = 0; i < n; ++i)
        if (row_best[i].i >= 0) best.consider(row_best[i].cos, row_best[i].i, row_best[i].j);
    return {best.i, best.j};
}

std::pair<int, int> min_cosine_pair_greedy(const Mat& columns) {
    const Vec norms = column_norms_checked(columns);
    const int n = static_cast<int>(columns.cols());
    int i = 0, j = 1;
    double pair_cos = columns.col(0).dot(columns.col(1)) / (norms(0) * norms(1));
    for (int k = 2; k < n; ++k) {
        const double ci = columns.col(i).dot(columns.col(k)) / (norms(i) * norms(k));
        const double cj = columns.col(k).dot(columns.col(j)) / (norms(k) * norms(j));
        if (ci < pair_cos) {
            j = k;
            pair_cos = ci;
        } else if (cj < pair_cos) {
            i = k;
            pair_cos = cj;
        }
    }
    if (i > j) std::swap(i, j);
    return {i, j};
}

}  // namespace unmix
