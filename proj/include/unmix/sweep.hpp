#pragma once

#include "unmix/datagen.hpp"
#include "unmix/epfit.hpp"
#include "unmix/minvolfit.hpp"
#include "unmix/nmf.hpp"

#include <optional>
#include <string>
#include <vector>

namespace unmix {

// ============================================================================
// Run configuration (JSON-backed)
// ============================================================================

struct AlgorithmSpec {
    std::string name;                 // minvolfit | epfit | minvolnmf
    std::vector<double> lambdas;      // minvolfit / minvolnmf grids
    int alpha = 0;                    // epfit removal count
    double delta = 0.1;               // minvolnmf logdet shift
    long n_iters = 0;                 // 0 = library default
    std::optional<double> early_stop_rel_tol;
    PairSearch pair_search = PairSearch::exact;

    /// Hyperparameter grid as (value, label) rows; epfit exposes alpha.
    std::vector<double> grid() const;
};

struct RunConfig {
    std::uint64_t seed = 0;
    int bags = 20;
    int patches_per_bag = 10;
    int pixels_per_patch = 25;
    int bands = 30;
    double r = 1.0;
    double p = 0.5;
    bool is_strict = false;
    std::vector<double> snr;
    std::vector<AlgorithmSpec> algorithms;
    std::string out = "results";
    int jobs = 0;  // 0 = all available

    void validate() const;  // throws SchemaError with a field path
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// ============================================================================
// Sweep driver
// ============================================================================

struct CellFailure {
    std::string algorithm;
    double hyper = 0.0;
    double snr = 0.0;
    int bag_id = 0;
    std::string message;
};

struct SweepResult {
    std::vector<EvalRecord> records;   // sorted by (algorithm, hyper, snr, bag)
    std::vector<MedianRow> medians;    // sorted by key
    std::vector<CellFailure> failures;
};

/// Executes the (algorithm x hyperparameter x SNR x bag) grid. Cells are
/// independent and may run on an OpenMP worker pool; results are identical to
/// a sequential run. Does not touch the filesystem.
SweepResult run_sweep(const RunConfig& cfg);

/// Runs the sweep and writes records.csv, medians.csv and one curve_*.csv per
/// (algorithm, hyperparameter) under cfg.out.
SweepResult run_sweep_and_write(const RunConfig& cfg);

/// Fits one bag with one algorithm configuration; shared by `fit` and the
/// sweep driver.
Vec fit_bag(const PatchSet& bag, const AlgorithmSpec& alg, double hyper,
            std::uint64_t seed);

}  // namespace unmix
