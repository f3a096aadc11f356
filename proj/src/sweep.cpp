#include "unmix/sweep.hpp"

#include "unmix/io.hpp"
#include "unmix/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unmix {

using nlohmann::json;

// ============================================================================
// Configuration
// ============================================================================

std::vector<double> AlgorithmSpec::grid() const {
    if (name == "epfit") return {static_cast<double>(alpha)};
    return lambdas;
}

void RunConfig::validate() const {
    if (bags < 1) throw SchemaError("bags must be >= 1", "bags");
    if (snr.empty()) throw SchemaError("snr grid must be nonempty", "snr");
    for (std::size_t i = 0; i < snr.size(); ++i)
        if (!(snr[i] > 0.0))
            throw SchemaError("snr must be positive", "snr[" + std::to_string(i) + "]");
    if (algorithms.empty())
        throw SchemaError("algorithms must be nonempty", "algorithms");
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
        const auto& alg = algorithms[a];
        const std::string path = "algorithms[" + std::to_string(a) + "]";
        if (alg.name != "minvolfit" && alg.name != "epfit" && alg.name != "minvolnmf")
            throw SchemaError("unknown algorithm '" + alg.name + "'", path + ".name");
        if (alg.name != "epfit" && alg.lambdas.empty())
            throw SchemaError("lambda grid must be nonempty", path + ".lambda");
        if (alg.alpha < 0) throw SchemaError("alpha must be >= 0", path + ".alpha");
        if (alg.name == "minvolnmf" && !(alg.delta > 0.0))
            throw SchemaError("delta must be positive", path + ".delta");
    }
}

namespace {

template <typename T>
T require(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw SchemaError("missing field", path + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError("field has the wrong type", path + key);
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("config is not valid JSON", "");
    RunConfig cfg;
    cfg.seed = require<std::uint64_t>(j, "seed", "");
    cfg.bags = require<int>(j, "bags", "");
    cfg.patches_per_bag = require<int>(j, "patches_per_bag", "");
    cfg.pixels_per_patch = require<int>(j, "pixels_per_patch", "");
    cfg.bands = require<int>(j, "bands", "");
    cfg.r = require<double>(j, "r", "");
    cfg.p = require<double>(j, "p", "");
    cfg.is_strict = j.value("is_strict", false);
    cfg.snr = require<std::vector<double>>(j, "snr", "");
    cfg.out = j.value("out", "results");
    cfg.jobs = j.value("jobs", 0);
    if (!j.contains("algorithms") || !j["algorithms"].is_array())
        throw SchemaError("missing or non-array field", "algorithms");
    int idx = 0;
    for (const auto& a : j["algorithms"]) {
        const std::string path = "algorithms[" + std::to_string(idx++) + "].";
        AlgorithmSpec spec;
        spec.name = require<std::string>(a, "name", path);
        if (a.contains("lambda"))
            spec.lambdas = require<std::vector<double>>(a, "lambda", path);
        spec.alpha = a.value("alpha", 0);
        spec.delta = a.value("delta", 0.1);
        spec.n_iters = a.value("n_iters", 0L);
        if (a.contains("early_stop_rel_tol"))
            spec.early_stop_rel_tol = require<double>(a, "early_stop_rel_tol", path);
        if (a.contains("pair_search")) {
            const auto mode = require<std::string>(a, "pair_search", path);
            if (mode == "exact")
                spec.pair_search = PairSearch::exact;
            else if (mode == "greedy")
                spec.pair_search = PairSearch::greedy;
            else
                throw SchemaError("pair_search must be exact|greedy", path + "pair_search");
        }
        cfg.algorithms.push_back(std::move(spec));
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

// ============================================================================
// Fitting one cell
// ============================================================================

Vec fit_bag(const PatchSet& bag, const AlgorithmSpec& alg, double hyper,
            std::uint64_t seed) {
    if (alg.name == "minvolfit") {
        MinVolConfig cfg;
        cfg.lambda = hyper;
        cfg.n_iters = alg.n_iters > 0 ? alg.n_iters : 1000000;
        cfg.seed = seed;
        cfg.early_stop_rel_tol = alg.early_stop_rel_tol;
        cfg.skip_rank_check = true;  // noisy sweep data
        const FitResult fit = minvolfit(bag, cfg);
        // f is reported through the ratio convention used everywhere else:
        // strictly positive via a tiny floor so signature_error is defined.
        return fit.params.f.cwiseMax(1e-12);
    }
    if (alg.name == "epfit") {
        EPFitConfig cfg;
        cfg.inner.seed = seed;
        if (alg.n_iters > 0) cfg.inner.n_iters = alg.n_iters;
        cfg.inner.early_stop_rel_tol = alg.early_stop_rel_tol;
        cfg.inner.skip_rank_check = true;
        cfg.removal_count = alg.alpha;
        cfg.pair_search = alg.pair_search;
        return epfit(bag, cfg);
    }
    if (alg.name == "minvolnmf") {
        NmfConfig cfg;
        cfg.lambda = hyper;
        cfg.delta = alg.delta;
        cfg.n_iters = alg.n_iters > 0 ? alg.n_iters : 50000;
        cfg.seed = seed;
        cfg.early_stop_rel_tol = alg.early_stop_rel_tol;
        Vec f = benchmark_extract(bag, cfg);
        return f.cwiseMax(1e-12);
    }
    throw UsageError("unknown algorithm: " + alg.name);
}

// ============================================================================
// Sweep driver
// ============================================================================

namespace {

struct Cell {
    int alg_idx, hyper_idx, snr_idx, bag_id;
};

}  // namespace

SweepResult run_sweep(const RunConfig& cfg) {
    cfg.validate();
    const int S = static_cast<int>(cfg.snr.size());

    // Bags are generated once per (snr, bag) cell and shared by every
    // algorithm so the comparison sees identical data.
    std::vector<PatchSet> bags(static_cast<std::size_t>(S) * cfg.bags);
    std::vector<Vec> truths(bags.size());
    for (int s = 0; s < S; ++s) {
        for (int b = 0; b < cfg.bags; ++b) {
            SynthConfig dc;
            dc.K = cfg.patches_per_bag;
            dc.N = cfg.pixels_per_patch;
            dc.M = cfg.bands;
            dc.r = cfg.r;
            dc.p = cfg.p;
            dc.is_strict = cfg.is_strict;
            dc.snr = cfg.snr[s];
            dc.seed = derive_seed(cfg.seed, 0xBA6, s, b);
            auto [bag, truth] = generate_bag(dc);
            bags[static_cast<std::size_t>(s) * cfg.bags + b] = std::move(bag);
            truths[static_cast<std::size_t>(s) * cfg.bags + b] = truth.params.f;
        }
    }

    std::vector<Cell> cells;
    for (int a = 0; a < static_cast<int>(cfg.algorithms.size()); ++a) {
        const auto grid = cfg.algorithms[a].grid();
        for (int h = 0; h < static_cast<int>(grid.size()); ++h)
            for (int s = 0; s < S; ++s)
                for (int b = 0; b < cfg.bags; ++b) cells.push_back({a, h, s, b});
    }

    std::vector<EvalRecord> records(cells.size());
    std::vector<std::string> errors(cells.size());

#ifdef _OPENMP
    const int jobs = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
#endif
    for (long c = 0; c < static_cast<long>(cells.size()); ++c) {
        const Cell& cell = cells[c];
        const auto& alg = cfg.algorithms[cell.alg_idx];
        const double hyper = alg.grid()[cell.hyper_idx];
        const std::uint64_t seed =
            derive_seed(cfg.seed, 0xF17 + cell.alg_idx * 131 + cell.hyper_idx,
                        cell.snr_idx, cell.bag_id);
        EvalRecord rec;
        rec.algorithm = alg.name;
        rec.lambda_or_alpha = hyper;
        rec.snr = cfg.snr[cell.snr_idx];
        rec.bag_id = cell.bag_id;
        rec.seed = seed;
        try {
            const auto& bag =
                bags[static_cast<std::size_t>(cell.snr_idx) * cfg.bags + cell.bag_id];
            const Vec f_est = fit_bag(bag, alg, hyper, seed);
            rec.angular_difference_deg = signature_error(
                f_est, truths[static_cast<std::size_t>(cell.snr_idx) * cfg.bags +
                              cell.bag_id]);
        } catch (const std::exception& e) {
            errors[c] = e.what();
        }
        records[c] = std::move(rec);
    }

    SweepResult out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!errors[c].empty()) {
            const Cell& cell = cells[c];
            out.failures.push_back({cfg.algorithms[cell.alg_idx].name,
                                    cfg.algorithms[cell.alg_idx].grid()[cell.hyper_idx],
                                    cfg.snr[cell.snr_idx], cell.bag_id, errors[c]});
        } else {
            out.records.push_back(std::move(records[c]));
        }
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const EvalRecord& a, const EvalRecord& b) {
                  return std::tie(a.algorithm, a.lambda_or_alpha, a.snr, a.bag_id) <
                         std::tie(b.algorithm, b.lambda_or_alpha, b.snr, b.bag_id);
              });
    if (!out.records.empty()) out.medians = median_by(out.records);
    return out;
}

SweepResult run_sweep_and_write(const RunConfig& cfg) {
    SweepResult res = run_sweep(cfg);
    std::filesystem::create_directories(cfg.out);
    write_records_csv(cfg.out + "/records.csv", res.records);
    write_medians_csv(cfg.out + "/medians.csv", res.medians);

    // One plot-data file per (algorithm, hyperparameter) curve.
    for (const auto& alg : cfg.algorithms) {
        for (double hyper : alg.grid()) {
            std::vector<MedianRow> curve;
            for (const auto& row : res.medians)
                if (row.algorithm == alg.name && row.lambda_or_alpha == hyper)
                    curve.push_back(row);
            std::sort(curve.begin(), curve.end(),
                      [](const MedianRow& a, const MedianRow& b) { return a.snr < b.snr; });
            if (!curve.empty())
                write_curve_csv(cfg.out + "/curve_" + alg.name + "_" +
                                    format_double(hyper) + ".csv",
                                curve);
        }
    }
    return res;
}

}  // namespace unmix
