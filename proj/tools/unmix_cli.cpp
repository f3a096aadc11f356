// Command-line front end: synthetic bag generation, single fits, the full
// sweep protocol, cube patch sampling, the label-based reference oracle, and
// estimate-vs-reference evaluation.

#include "unmix/epfit.hpp"
#include "unmix/io.hpp"
#include "unmix/minvolfit.hpp"
#include "unmix/nmf.hpp"
#include "unmix/rng.hpp"
#include "unmix/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace unmix;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDataEmpty = 3;
constexpr int kExitNumeric = 4;

json vec_to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vec vec_from_json(const json& a) {
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
    return v;
}

void write_json(const std::string& path, const json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << std::endl;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_gen(const std::string& out_dir, int bags, int K, int N, int M, double r,
            double p, bool strict, std::vector<double> snr, std::uint64_t seed) {
    if (snr.empty()) snr.push_back(std::numeric_limits<double>::infinity());
    std::filesystem::create_directories(out_dir);
    for (std::size_t s = 0; s < snr.size(); ++s) {
        for (int b = 0; b < bags; ++b) {
            SynthConfig cfg;
            cfg.K = K;
            cfg.N = N;
            cfg.M = M;
            cfg.r = r;
            cfg.p = p;
            cfg.is_strict = strict;
            cfg.snr = snr[s];
            cfg.seed = derive_seed(seed, 0xBA6, s, static_cast<std::uint64_t>(b));
            auto [bag, truth] = generate_bag(cfg);
            const std::string path = out_dir + "/bag_b" + std::to_string(b) + "_snr" +
                                     std::to_string(s) + ".bag";
            write_bag_file(path, bag, &truth.params);
            std::cout << path << '\n';
        }
    }
    return kExitOk;
}

int cmd_fit(const std::string& bag_path, const std::string& algorithm,
            std::vector<double> lambdas, int alpha, long n_iters, std::uint64_t seed,
            const std::string& out) {
    if (algorithm != "minvolfit" && algorithm != "epfit" && algorithm != "minvolnmf")
        throw UsageError("unknown algorithm: " + algorithm);
    BagFileContents contents = read_bag_file(bag_path);

    AlgorithmSpec spec;
    spec.name = algorithm;
    spec.alpha = alpha;
    spec.n_iters = n_iters;
    if (lambdas.empty()) lambdas = {algorithm == "minvolnmf" ? 0.1 : 1e-4};
    spec.lambdas = lambdas;

    json results = json::array();
    for (double hyper : spec.grid()) {
        const auto t0 = std::chrono::steady_clock::now();
        const Vec f_est = fit_bag(contents.bag, spec, hyper, seed);
        const auto t1 = std::chrono::steady_clock::now();
        json r;
        r["algorithm"] = algorithm;
        r["hyperparams"] =
            (algorithm == "epfit") ? json{{"alpha", alpha}} : json{{"lambda", hyper}};
        r["seed"] = seed;
        r["f_est"] = vec_to_json(f_est);
        r["runtime_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        if (contents.truth)
            r["signature_error"] = signature_error(f_est, contents.truth->f);
        results.push_back(std::move(r));
    }
    write_json(out, results.size() == 1 ? results[0] : results);
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override,
              int jobs_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.out = out_override;
    if (jobs_override > 0) cfg.jobs = jobs_override;
    SweepResult res = run_sweep_and_write(cfg);
    std::cout << "records: " << res.records.size() << "\nsummary rows: "
              << res.medians.size() << "\nfailures: " << res.failures.size() << '\n';
    for (const auto& f : res.failures)
        std::cerr << "cell failed: " << f.algorithm << " hyper=" << f.hyper
                  << " snr=" << f.snr << " bag=" << f.bag_id << ": " << f.message << '\n';
    return res.failures.empty() ? kExitOk : kExitNumeric;
}

int cmd_oracle(const std::string& cube_path, double max_dist, int top_k,
               const std::string& out) {
    LabeledCube cube = read_cube_file(cube_path);
    OracleResult res = oracle_reference(cube, max_dist, top_k);
    json j;
    j["f_ref"] = vec_to_json(res.f_ref);
    j["n_candidates"] = res.n_candidates;
    j["flooring_events"] = res.flooring_events;
    write_json(out, j);
    return kExitOk;
}

int cmd_patches(const std::string& cube_path, int window, int stride,
                const std::string& out) {
    LabeledCube cube = read_cube_file(cube_path);
    SampleStats stats;
    PatchSet bag = sample_patches(cube, window, stride, &stats);
    if (bag.patches.empty())
        throw EmptyOracleError("patches: no label-pure window found");
    write_bag_file(out, bag, nullptr);
    std::cout << "kept: " << stats.kept << "\ndiscarded: " << stats.discarded << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& estimate_path, const std::string& bag_path,
             const std::string& reference_path, const std::string& out) {
    std::ifstream in(estimate_path);
    if (!in) throw InvalidInputError("cannot open estimate: " + estimate_path);
    json est = json::parse(in, nullptr, false);
    if (est.is_discarded()) throw FormatError("estimate is not valid JSON", 0);
    const Vec f_est = vec_from_json(est.contains("f_est") ? est["f_est"]
                                                          : est.at("f_ref"));
    Vec f_ref;
    if (!bag_path.empty()) {
        BagFileContents contents = read_bag_file(bag_path);
        if (!contents.truth)
            throw InvalidInputError("eval: bag file carries no ground truth");
        f_ref = contents.truth->f;
    } else if (!reference_path.empty()) {
        std::ifstream rin(reference_path);
        if (!rin) throw InvalidInputError("cannot open reference: " + reference_path);
        json ref = json::parse(rin, nullptr, false);
        if (ref.is_discarded()) throw FormatError("reference is not valid JSON", 0);
        f_ref = vec_from_json(ref.contains("f_ref") ? ref["f_ref"] : ref.at("f_est"));
    } else {
        throw UsageError("eval: provide --bag or --reference");
    }
    json j;
    j["signature_error_deg"] = signature_error(f_est.cwiseMax(1e-12), f_ref.cwiseMax(1e-12));
    write_json(out, j);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foreground material-signature extraction toolkit"};
    app.require_subcommand(1);

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "generate synthetic bag files");
    std::string gen_out = "bags";
    int gen_bags = 20, gen_K = 10, gen_N = 25, gen_M = 30;
    double gen_r = 1.0, gen_p = 0.5;
    bool gen_strict = false;
    std::vector<double> gen_snr;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--bags", gen_bags, "bags per SNR");
    gen->add_option("--patches", gen_K, "patches per bag");
    gen->add_option("--pixels", gen_N, "pixels per patch");
    gen->add_option("--bands", gen_M, "bands per pixel");
    gen->add_option("--r", gen_r, "individual background weight");
    gen->add_option("--p", gen_p, "tight-patch probability");
    gen->add_flag("--strict", gen_strict, "strictly tight setting");
    gen->add_option("--snr", gen_snr, "SNR grid (omit for noiseless)");
    gen->add_option("--seed", gen_seed, "base seed");

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "fit one bag file");
    std::string fit_bag_path, fit_alg = "epfit", fit_out;
    std::vector<double> fit_lambda;
    int fit_alpha = 0;
    long fit_iters = 0;
    std::uint64_t fit_seed = 0;
    fit->add_option("--bag", fit_bag_path, "bag file")->required();
    fit->add_option("--algorithm", fit_alg, "minvolfit|epfit|minvolnmf");
    fit->add_option("--lambda", fit_lambda, "regularization weight(s)");
    fit->add_option("--alpha", fit_alpha, "epfit removal count");
    fit->add_option("--n-iters", fit_iters, "iteration budget (0 = default)");
    fit->add_option("--seed", fit_seed, "seed");
    fit->add_option("--out", fit_out, "output JSON path (default stdout)");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "run the evaluation protocol");
    std::string sweep_config, sweep_out;
    int sweep_jobs = 0;
    sweep->add_option("--config", sweep_config, "run config JSON")->required();
    sweep->add_option("--out", sweep_out, "output directory override");
    sweep->add_option("--jobs", sweep_jobs, "worker count override");

    // --- oracle ---
    auto* oracle = app.add_subcommand("oracle", "reference signature from labels");
    std::string oracle_cube, oracle_out;
    double oracle_dist = 10.0;
    int oracle_topk = 10;
    oracle->add_option("--cube", oracle_cube, "cube file")->required();
    oracle->add_option("--max-dist", oracle_dist, "pixel distance bound");
    oracle->add_option("--top-k", oracle_topk, "candidates averaged");
    oracle->add_option("--out", oracle_out, "output JSON path (default stdout)");

    // --- patches ---
    auto* patches = app.add_subcommand("patches", "sample label-pure windows");
    std::string patches_cube, patches_out = "patches.bag";
    int patches_window = 12, patches_stride = 1;
    patches->add_option("--cube", patches_cube, "cube file")->required();
    patches->add_option("--window", patches_window, "window side");
    patches->add_option("--stride", patches_stride, "window stride");
    patches->add_option("--out", patches_out, "output bag file");

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "score an estimate against a reference");
    std::string eval_est, eval_bag, eval_ref, eval_out;
    eval->add_option("--estimate", eval_est, "estimate JSON (fit/oracle output)")
        ->required();
    eval->add_option("--bag", eval_bag, "bag file with ground truth");
    eval->add_option("--reference", eval_ref, "reference JSON");
    eval->add_option("--out", eval_out, "output JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_bags, gen_K, gen_N, gen_M, gen_r, gen_p,
                           gen_strict, gen_snr, gen_seed);
        if (fit->parsed())
            return cmd_fit(fit_bag_path, fit_alg, fit_lambda, fit_alpha, fit_iters,
                           fit_seed, fit_out);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_jobs);
        if (oracle->parsed())
            return cmd_oracle(oracle_cube, oracle_dist, oracle_topk, oracle_out);
        if (patches->parsed())
            return cmd_patches(patches_cube, patches_window, patches_stride, patches_out);
        if (eval->parsed()) return cmd_eval(eval_est, eval_bag, eval_ref, eval_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EmptyOracleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataEmpty;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
