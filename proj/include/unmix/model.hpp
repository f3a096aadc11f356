#pragma once

#include "unmix/common.hpp"

#include <vector>

namespace unmix {

// ============================================================================
// Domain types
// ============================================================================

/// One patch of hyperspectral pixels: column = pixel, row = band.
struct Patch {
    Mat data;  // M x N_k, nonnegative reflectance

    int bands() const { return static_cast<int>(data.rows()); }
    int pixels() const { return static_cast<int>(data.cols()); }

    /// Checks M >= 3, N_k >= 2 and that no column norm is below `column_floor`
    /// (0 for the noiseless construction, relaxed for noisy data).
    void validate(double column_floor = 0.0) const;
};

/// An ordered bag of patches sharing the band count.
struct PatchSet {
    std::vector<Patch> patches;

    int count() const { return static_cast<int>(patches.size()); }
    int bands() const { return patches.empty() ? 0 : patches.front().bands(); }
    long total_pixels() const;
    double squared_norm() const;

    void validate(double column_floor = 0.0) const;
};

/// A factorization (f, {v^(k)}, {C^(k)}) of a bag.
/// Row 1 of each C multiplies f, row 2 multiplies the all-ones vector.
struct ModelParams {
    Vec f;                     // M, strictly positive
    std::vector<Vec> v;        // K vectors of length M, strictly positive
    std::vector<CoefMat> C;    // K matrices 2 x N_k, nonnegative

    int bands() const { return static_cast<int>(f.size()); }
    int count() const { return static_cast<int>(v.size()); }

    void validate() const;
};

/// Data-dependent minimum coefficient ratios (Eq. "r").
struct TightnessRatios {
    double r_a = 0.0;
    double r_b = 0.0;
};

/// A solution-space transform (alpha, beta, gamma, delta, {eps_k}).
struct TransformParams {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 1.0;
    std::vector<double> eps;  // K strictly positive scalars

    double det() const { return alpha * delta - beta * gamma; }
};

/// Feasible box for the (c, t, u) reparameterization of the solution space.
struct CtuBox {
    double t_lo = 0.0, t_hi = 0.0;  // t in [t_lo, t_hi)
    double u_lo = 0.0, u_hi = 0.0;  // u in (u_lo, u_hi]

    bool contains(double c, double t, double u) const {
        return c > 0.0 && t >= t_lo && t < t_hi && u > u_lo && u <= u_hi;
    }
};

// ============================================================================
// Operations
// ============================================================================

/// Y^(k) = diag(v^(k)) [f 1] C^(k) for every patch.
PatchSet reconstruct(const ModelParams& params);

/// Sum of squared Frobenius fitting errors over all patches.
double residual(const PatchSet& bag, const ModelParams& params);
/// Serial reference for the OpenMP version above; same result bit for bit.
double residual_serial(const PatchSet& bag, const ModelParams& params);

/// Normalized-determinant volume: 1 - ((f' 1) / (||1|| ||f||))^2, in [0, 1].
double volume(const Vec& f);

/// Gradient of volume() with respect to f.
Vec volume_gradient(const Vec& f);

/// Minimum coefficient ratios across all columns of all patches; a ratio with
/// zero denominator counts as +inf and never attains the minimum.
TightnessRatios tightness_ratios(const std::vector<CoefMat>& C);

/// f_0 = (f + r_a 1) ./ (r_b f + 1), the canonical identifiable solution.
Vec canonical_solution(const Vec& f, const TightnessRatios& ratios);

/// True iff both endpoint kinds occur: some column with c2 <= tol*c1 (c1 > 0)
/// and some column with c1 <= tol*c2 (c2 > 0).
bool is_fully_tight(const std::vector<CoefMat>& C, double tol);

/// Applies the solution-space transform of Property 1; reconstruction is
/// invariant.
ModelParams apply_transform(const ModelParams& params, const TransformParams& T);

/// Corollary 1 conditions: alpha f + beta 1 > 0, gamma f + delta 1 > 0,
/// Tmat^-1 [[1, r_b], [r_a, 1]] >= 0, det != 0. Singular transforms return
/// false rather than throwing.
bool feasible_transform_check(const TransformParams& T, const Vec& f,
                              const TightnessRatios& ratios);

/// Feasible (c, t, u) box; requires min f < 1 < max f (rescale first).
CtuBox ctu_feasible_box(const Vec& f, const TightnessRatios& ratios);

/// Rescales f by 2 / (min f + max f) so it straddles 1.
Vec rescale_straddle(const Vec& f);

/// s(c, t, u) = c (t f + (1-t) 1) ./ (u f + (1-u) 1).
Vec ctu_solution(double c, double t, double u, const Vec& f);

/// Maps (c, t, u) to transform coefficients (alpha, beta, gamma, delta)
/// = (c t, c (1 - t), u, 1 - u) with unit eps.
TransformParams ctu_to_transform(double c, double t, double u, int patch_count);

struct CtuGradient {
    Eigen::Vector3d grad;  // dJ/d(c, t, u), J = (s' 1) / ||s||
    double K1 = 0.0;
    double K2 = 0.0;
};

/// Analytic gradient of J(c, t, u) = (s' 1) / ||s||; the c component is
/// exactly zero and K1, K2 are positive when 1, f, f.*f are independent.
CtuGradient minvol_gradient_ctu(double c, double t, double u, const Vec& f);

/// True iff the second singular value exceeds tol times the first.
bool patch_rank2_check(const Patch& patch, double tol);

}  // namespace unmix
