#pragma once

#include "unmix/model.hpp"
#include "unmix/numerics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace unmix {

struct NmfConfig {
    double lambda = 0.1;      // logdet weight
    double delta = 0.1;       // logdet shift and output floor
    long n_iters = 50000;
    std::uint64_t seed = 0;
    StepControl step;
    std::optional<double> early_stop_rel_tol;
    int n_starts = 1;
};

struct NmfResult {
    Mat W;                               // M x 2, nonnegative
    Mat H;                               // 2 x N, nonnegative
    std::vector<double> objective_trace; // ||Y - WH||_F^2 + lambda logdet(W'W + dI)
    long iterations_run = 0;
    long clamped_negatives = 0;          // input entries clamped to 0

    double final_objective() const { return objective_trace.back(); }
};

/// Rank-2 volume-regularized NMF by alternating projected gradient with
/// backtracking. W columns are rescaled to the mean data column norm each
/// iteration (H compensating) to remove the scale drift of the logdet term.
NmfResult minvol_nmf(const Mat& Y, const NmfConfig& cfg);

/// Benchmark adaptation: concatenate all patches, run minvol_nmf, floor W at
/// delta and return W_:,1 ./ W_:,2.
Vec benchmark_extract(const PatchSet& bag, const NmfConfig& cfg,
                      NmfResult* diag = nullptr);

}  // namespace unmix
