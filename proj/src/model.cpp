#include "unmix/model.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ============================================================================
// Type invariants
// ============================================================================

void Patch::validate(double column_floor) const {
    if (bands() < 3) throw DimensionError("Patch: band count must be >= 3");
    if (pixels() < 2) throw DimensionError("Patch: pixel count must be >= 2");
    for (int j = 0; j < pixels(); ++j) {
        if (data.col(j).norm() <= column_floor)
            throw InvalidInputError("Patch: column " + std::to_string(j) +
                                    " is below the norm floor");
    }
}

long PatchSet::total_pixels() const {
    long n = 0;
    for (const auto& p : patches) n += p.pixels();
    return n;
}

double PatchSet::squared_norm() const {
    double s = 0.0;
    for (const auto& p : patches) s += p.data.squaredNorm();
    return s;
}

void PatchSet::validate(double column_floor) const {
    if (patches.empty()) throw InvalidInputError("PatchSet: needs at least one patch");
    const int m = patches.front().bands();
    for (const auto& p : patches) {
        p.validate(column_floor);
        if (p.bands() != m) throw DimensionError("PatchSet: patches disagree on band count");
    }
}

void ModelParams::validate() const {
    if (v.size() != C.size())
        throw DimensionError("ModelParams: v and C list lengths differ");
    if ((f.array() <= 0.0).any())
        throw DomainError("ModelParams: f must be strictly positive");
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k].size() != f.size())
            throw DimensionError("ModelParams: v size mismatch at patch " + std::to_string(k));
        if ((v[k].array() <= 0.0).any())
            throw DomainError("ModelParams: v must be strictly positive");
        if ((C[k].array() < 0.0).any())
            throw DomainError("ModelParams: C must be nonnegative");
    }
}

// ============================================================================
// Reconstruction and residual
// ============================================================================

static Mat reconstruct_patch(const Vec& f, const Vec& v, const CoefMat& C) {
    if (v.size() != f.size())
        throw DimensionError("reconstruct: f and v length mismatch");
    // diag(v) [f 1] C = (v.*f) c1' + v c2'
    return (v.cwiseProduct(f)) * C.row(0) + v * C.row(1);
}

PatchSet reconstruct(const ModelParams& params) {
    if (params.v.size() != params.C.size())
        throw DimensionError("reconstruct: v and C list lengths differ");
    PatchSet out;
    out.patches.resize(params.v.size());
    for (std::size_t k = 0; k < params.v.size(); ++k)
        out.patches[k].data = reconstruct_patch(params.f, params.v[k], params.C[k]);
    return out;
}

double residual_serial(const PatchSet& bag, const ModelParams& params) {
    if (bag.count() != params.count())
        throw DimensionError("residual: patch count mismatch");
    double s = 0.0;
    for (int k = 0; k < bag.count(); ++k) {
        if (bag.patches[k].pixels() != params.C[k].cols())
            throw DimensionError("residual: pixel count mismatch at patch " + std::to_string(k));
        s += (bag.patches[k].data - reconstruct_patch(params.f, params.v[k], params.C[k]))
                 .squaredNorm();
    }
    return s;
}

double residual(const PatchSet& bag, const ModelParams& params) {
    if (bag.count() != params.count())
        throw DimensionError("residual: patch count mismatch");
    const int K = bag.count();
    for (int k = 0; k < K; ++k)
        if (bag.patches[k].pixels() != params.C[k].cols())
            throw DimensionError("residual: pixel count mismatch at patch " + std::to_string(k));
    std::vector<double> partial(K);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < K; ++k)
        partial[k] = (bag.patches[k].data -
                      reconstruct_patch(params.f, params.v[k], params.C[k]))
                         .squaredNorm();
    // Serial combine in index order keeps the sum bitwise equal to the
    // serial reference regardless of thread count.
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += partial[k];
    return s;
}

// ============================================================================
// Volume measure
// ============================================================================

double volume(const Vec& f) {
    if (f.size() < 2) throw DimensionError("volume: needs M >= 2");
    if ((f.array() <= 0.0).any())
        throw DomainError("volume: f must be strictly positive");
    const double m = static_cast<double>(f.size());
    const double dot = f.sum();
    const double q = (dot * dot) / (m * f.squaredNorm());
    return 1.0 - q;
}

Vec volume_gradient(const Vec& f) {
    const double m = static_cast<double>(f.size());
    const double dot = f.sum();
    const double nf2 = f.squaredNorm();
    // d/df [1 - (f'1)^2 / (M ||f||^2)] = 2 (f'1) ((f'1) f - ||f||^2 1) / (M ||f||^4)
    return (2.0 * dot / (m * nf2 * nf2)) * (dot * f - nf2 * Vec::Ones(f.size()));
}

// ============================================================================
// Tightness ratios and the canonical solution
// ============================================================================

TightnessRatios tightness_ratios(const std::vector<CoefMat>& C) {
    if (C.empty()) throw InvalidInputError("tightness_ratios: empty coefficient set");
    double r_a = kInf, r_b = kInf;
    bool any_rank2 = false;
    for (const auto& c : C) {
        double amin = kInf, amax = -kInf;
        for (int j = 0; j < c.cols(); ++j) {
            const double c1 = c(0, j), c2 = c(1, j);
            if (c1 == 0.0 && c2 == 0.0)
                throw InvalidInputError("tightness_ratios: zero column");
            if (c1 < 0.0 || c2 < 0.0)
                throw InvalidInputError("tightness_ratios: negative coefficient");
            const double ra = (c1 == 0.0) ? kInf : c2 / c1;
            const double rb = (c2 == 0.0) ? kInf : c1 / c2;
            r_a = std::min(r_a, ra);
            r_b = std::min(r_b, rb);
            const double alpha = c1 / (c1 + c2);
            amin = std::min(amin, alpha);
            amax = std::max(amax, alpha);
        }
        if (amax > amin) any_rank2 = true;
    }
    if (!any_rank2)
        throw RankError("tightness_ratios: no coefficient matrix has rank 2");
    return {r_a, r_b};
}

Vec canonical_solution(const Vec& f, const TightnessRatios& ratios) {
    if ((f.array() <= 0.0).any())
        throw DomainError("canonical_solution: f must be strictly positive");
    if (ratios.r_a * ratios.r_b >= 1.0)
        throw IdentifiabilityError("canonical_solution: r_a * r_b >= 1");
    return (f.array() + ratios.r_a) / (ratios.r_b * f.array() + 1.0);
}

bool is_fully_tight(const std::vector<CoefMat>& C, double tol) {
    const TightnessRatios r = tightness_ratios(C);
    return r.r_a <= tol && r.r_b <= tol;
}

// ============================================================================
// Solution-space transforms
// ============================================================================

ModelParams apply_transform(const ModelParams& params, const TransformParams& T) {
    if (T.eps.size() != params.v.size())
        throw DimensionError("apply_transform: eps length must match patch count");
    const double det = T.det();
    if (det == 0.0) throw SingularTransformError("apply_transform: singular transform");
    for (double e : T.eps)
        if (e <= 0.0) throw InvalidInputError("apply_transform: eps must be positive");

    const Vec num = T.alpha * params.f.array() + T.beta;
    const Vec den = T.gamma * params.f.array() + T.delta;
    if ((num.array() <= 0.0).any() || (den.array() <= 0.0).any())
        throw InfeasibleTransformError("apply_transform: positivity violated");

    ModelParams out;
    out.f = num.cwiseQuotient(den);
    out.v.resize(params.v.size());
    out.C.resize(params.C.size());
    // Tmat = [[alpha, gamma], [beta, delta]];
    // Tmat^-1 = 1/det [[delta, -gamma], [-beta, alpha]].
    for (std::size_t k = 0; k < params.v.size(); ++k) {
        out.v[k] = T.eps[k] * den.cwiseProduct(params.v[k]);
        CoefMat c(2, params.C[k].cols());
        c.row(0) = (T.delta * params.C[k].row(0) - T.gamma * params.C[k].row(1)) / det;
        c.row(1) = (-T.beta * params.C[k].row(0) + T.alpha * params.C[k].row(1)) / det;
        out.C[k] = c / T.eps[k];
    }
    return out;
}

bool feasible_transform_check(const TransformParams& T, const Vec& f,
                              const TightnessRatios& ratios) {
    const double det = T.det();
    if (det == 0.0) return false;
    if (((T.alpha * f.array() + T.beta) <= 0.0).any()) return false;
    if (((T.gamma * f.array() + T.delta) <= 0.0).any()) return false;
    // Tmat^-1 [[1, r_b], [r_a, 1]] >= 0 elementwise.
    const double a = (T.delta * 1.0 - T.gamma * ratios.r_a) / det;
    const double b = (T.delta * ratios.r_b - T.gamma * 1.0) / det;
    const double c = (-T.beta * 1.0 + T.alpha * ratios.r_a) / det;
    const double d = (-T.beta * ratios.r_b + T.alpha * 1.0) / det;
    return a >= 0.0 && b >= 0.0 && c >= 0.0 && d >= 0.0;
}

Vec rescale_straddle(const Vec& f) {
    const double lo = f.minCoeff(), hi = f.maxCoeff();
    if (lo <= 0.0) throw DomainError("rescale_straddle: f must be strictly positive");
    return f * (2.0 / (lo + hi));
}

CtuBox ctu_feasible_box(const Vec& f, const TightnessRatios& ratios) {
    const double lo = f.minCoeff(), hi = f.maxCoeff();
    if (!(lo < 1.0 && 1.0 < hi))
        throw RescaleRequiredError("ctu_feasible_box: f must straddle 1; rescale first");
    if (ratios.r_a * ratios.r_b >= 1.0)
        throw IdentifiabilityError("ctu_feasible_box: r_a * r_b >= 1");
    CtuBox box;
    box.t_lo = 1.0 / (1.0 + ratios.r_a);
    box.t_hi = 1.0 / (1.0 - lo);
    box.u_lo = -1.0 / (hi - 1.0);
    box.u_hi = ratios.r_b / (1.0 + ratios.r_b);
    return box;
}

Vec ctu_solution(double c, double t, double u, const Vec& f) {
    const Vec num = t * f.array() + (1.0 - t);
    const Vec den = u * f.array() + (1.0 - u);
    return c * num.cwiseQuotient(den);
}

TransformParams ctu_to_transform(double c, double t, double u, int patch_count) {
    TransformParams T;
    T.alpha = c * t;
    T.beta = c * (1.0 - t);
    T.gamma = u;
    T.delta = 1.0 - u;
    T.eps.assign(static_cast<std::size_t>(patch_count), 1.0);
    return T;
}

CtuGradient minvol_gradient_ctu(double c, double t, double u, const Vec& f) {
    if (t == u) throw DegenerateDirectionError("minvol_gradient_ctu: t == u");
    const Vec s = ctu_solution(c, t, u, f);
    const double m = static_cast<double>(f.size());
    const double s1 = s.sum();
    const double s2 = s.squaredNorm();
    const double s3 = s.array().cube().sum();  // s' (s .* s)
    const double norm3 = std::pow(s2, 1.5);
    CtuGradient g;
    g.K1 = s2 * m - s1 * s1;
    g.K2 = s3 * s1 - s2 * s2;
    const double scale = 1.0 / ((t - u) * norm3);
    g.grad = Eigen::Vector3d(0.0, -c * g.K1 * scale, (g.K2 / c) * scale);
    return g;
}

// ============================================================================
// Rank check
// ============================================================================

bool patch_rank2_check(const Patch& patch, double tol) {
    Eigen::JacobiSVD<Mat> svd(patch.data);
    const auto& sv = svd.singularValues();
    if (sv.size() < 2) return false;
    return sv(0) > 0.0 && sv(1) > tol * sv(0);
}

}  // namespace unmix
