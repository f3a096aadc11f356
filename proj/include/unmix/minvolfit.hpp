#pragma once

#include "unmix/model.hpp"
#include "unmix/numerics.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace unmix {

// ============================================================================
// Configuration and result
// ============================================================================

struct MinVolConfig {
    double lambda = 0.0;          // volume regularization weight
    long n_iters = 1000000;       // full block sweeps (paper production default)
    StepControl step;
    std::uint64_t seed = 0;
    std::optional<ModelParams> warm_start;            // default: uniform random init
    std::optional<double> early_stop_rel_tol;         // off by default
    bool skip_rank_check = false;                     // override for noisy real data
    double rank_tol = 1e-10;
    int n_starts = 1;                                 // used by minvolfit_multistart

    // When set, called with the current iterate after every sweep.
    std::function<void(const ModelParams&, long)> on_sweep;
};

struct FitResult {
    ModelParams params;                  // relaxed constraint set: f, v >= 0, unit norm
    std::vector<double> objective_trace; // g at init, then one entry per sweep
    double final_residual = 0.0;
    long iterations_run = 0;
    std::uint64_t seed_used = 0;

    double final_objective() const { return objective_trace.back(); }
};

// ============================================================================
// Objective and gradients
// ============================================================================

/// g = residual(bag, params) + lambda * volume(f).
double objective_g(const PatchSet& bag, const ModelParams& params, double lambda);

enum class Block { C_k, v_k, f };

/// Analytic partial of the patch-k fitting error with respect to C^(k).
CoefMat block_gradient_C(const PatchSet& bag, const ModelParams& params, int k);
/// Analytic partial of the patch-k fitting error with respect to v^(k).
Vec block_gradient_v(const PatchSet& bag, const ModelParams& params, int k);
/// Analytic partial of g with respect to f (summed residual + lambda vol).
Vec block_gradient_f(const PatchSet& bag, const ModelParams& params, double lambda);

/// Dispatcher over the block enum; vectors come back as M x 1 matrices.
/// k is ignored for Block::f.
Mat block_gradients(const PatchSet& bag, const ModelParams& params, double lambda,
                    Block block, int k = -1);

// ============================================================================
// Solver
// ============================================================================

/// Algorithm: volume-regularized projected block coordinate descent.
/// Each sweep updates C^(k) then v^(k) for k = 1..K, then f, each by a
/// backtracked projected gradient step. The objective trace is exactly
/// non-increasing.
FitResult minvolfit(const PatchSet& bag, const MinVolConfig& cfg);

/// Runs cfg.n_starts seeds derived from cfg.seed and returns the result with
/// the lowest final objective.
FitResult minvolfit_multistart(const PatchSet& bag, const MinVolConfig& cfg);

// ============================================================================
// Timing probe
// ============================================================================

struct ScalingRow {
    int K = 0, N = 0, M = 0;
    long total_pixels = 0;
    double sec_per_sweep = 0.0;
};

/// Mean per-sweep wall time for synthetic bags of the given (K, N, M) shapes;
/// `reps` repetitions, median taken per shape.
std::vector<ScalingRow> wallclock_scaling_probe(
    const std::vector<std::array<int, 3>>& shapes, long sweeps = 200, int reps = 3,
    std::uint64_t seed = 1234);

}  // namespace unmix
