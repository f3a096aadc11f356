#pragma once

#include "unmix/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace unmix {

// ============================================================================
// Projections
// ============================================================================

/// Elementwise max(y, 0).
Vec project_nonneg(const Vec& y);

/// Projection onto the intersection of the nonnegative orthant and the unit
/// sphere: (y)+ / ||(y)+|| when y has a positive entry, else the canonical
/// vector at argmin_i |y_i| (smallest index on ties).
Vec project_unit_nonneg(const Vec& y);

// ============================================================================
// Backtracking line search
// ============================================================================

struct StepControl {
    double eta0 = 1.0;
    double shrink = 0.5;
    double armijo_c = 1e-4;
    int max_backtracks = 40;
};

struct StepResult {
    Vec x;
    double eta = 0.0;  // 0 sentinel when no progress was possible
};

/// One projected-gradient step with Armijo backtracking. Tries
/// eta = eta0 * shrink^j for j = 0..max_backtracks and accepts the first
/// candidate x' = project(x - eta * grad) satisfying
///   value_fn(x') <= value_fn(x) - armijo_c * eta * ||grad||^2
/// when the projection left the raw step unchanged, or
///   value_fn(x') <= value_fn(x)
/// otherwise. Returns {x, 0} when every candidate fails or none moves.
StepResult backtrack_step(const std::function<double(const Vec&)>& value_fn,
                          const Vec& grad, const Vec& x,
                          const std::function<Vec(const Vec&)>& project,
                          const StepControl& ctrl);

// ============================================================================
// Rank-2 tools
// ============================================================================

/// Orthonormal M x 2 basis of the best rank-2 approximation (uncentered SVD).
/// Basis vectors are sign-fixed to nonnegative mean.
Mat rank2_basis(const Mat& A);

/// Least-squares coefficients C minimizing ||A - V C||_F columnwise.
Mat ls_coefficients(const Mat& V, const Mat& A);

// ============================================================================
// Cosine pair searches
// ============================================================================

double cosine(const Vec& u, const Vec& v);

/// Exhaustive O(N^2) minimum-cosine pair; ties broken by smallest (i, then j).
std::pair<int, int> min_cosine_pair_exact(const Mat& columns);
/// Serial reference for the OpenMP version above; identical output.
std::pair<int, int> min_cosine_pair_exact_serial(const Mat& columns);

/// Single-pass greedy: keeps a candidate pair and replaces one end whenever
/// that strictly decreases the pair cosine. Deterministic in input order.
std::pair<int, int> min_cosine_pair_greedy(const Mat& columns);

}  // namespace unmix
