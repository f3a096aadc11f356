// Compares the OpenMP kernels against their serial reference implementations
// and prints the solver's per-sweep scaling table.

#include "unmix/datagen.hpp"
#include "unmix/minvolfit.hpp"
#include "unmix/numerics.hpp"
#include "unmix/rng.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace unmix;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

LabeledCube make_cube(int side, int bands, std::uint64_t seed) {
    Rng rng(seed);
    LabeledCube cube;
    cube.width = side;
    cube.height = side;
    cube.bands = bands;
    cube.label_names = {"background", "foreground"};
    cube.image.resize(static_cast<std::size_t>(side) * side * bands);
    for (auto& x : cube.image) x = static_cast<float>(rng.uniform(0.2, 2.0));
    cube.labels.assign(static_cast<std::size_t>(side) * side, 0);
    cube.foreground.resize(static_cast<std::size_t>(side) * side);
    for (auto& f : cube.foreground) f = rng.uniform01() < 0.3 ? 1 : 0;
    return cube;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

    // --- residual: serial vs parallel ------------------------------------
    {
        SynthConfig cfg;
        cfg.K = 64;
        cfg.N = 256;
        cfg.M = 64;
        cfg.snr = 1e4;
        cfg.seed = 7;
        auto [bag, truth] = generate_bag(cfg);
        const double serial = time_of([&] { residual_serial(bag, truth.params); }, 5);
        const double parallel = time_of([&] { residual(bag, truth.params); }, 5);
        const bool equal =
            residual_serial(bag, truth.params) == residual(bag, truth.params);
        std::printf("residual      K=%d N=%d M=%d  serial %.3f ms  openmp %.3f ms  "
                    "speedup %.2fx  bitwise-equal %s\n",
                    cfg.K, cfg.N, cfg.M, serial * 1e3, parallel * 1e3,
                    serial / parallel, equal ? "yes" : "NO");
    }

    // --- min-cosine pair scan: serial vs parallel -------------------------
    {
        Rng rng(11);
        const int m = 32, n = 3000;
        Mat cols(m, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i) cols(i, j) = rng.uniform(0.1, 2.0);
        const double serial = time_of([&] { min_cosine_pair_exact_serial(cols); }, 3);
        const double parallel = time_of([&] { min_cosine_pair_exact(cols); }, 3);
        const bool equal = min_cosine_pair_exact_serial(cols) == min_cosine_pair_exact(cols);
        std::printf("pair scan     M=%d N=%d     serial %.3f ms  openmp %.3f ms  "
                    "speedup %.2fx  equal %s\n",
                    m, n, serial * 1e3, parallel * 1e3, serial / parallel,
                    equal ? "yes" : "NO");
    }

    // --- oracle pixel-pair scan: serial vs parallel ------------------------
    {
        LabeledCube cube = make_cube(64, 16, 23);
        const double serial =
            time_of([&] { oracle_reference_serial(cube, 6.0, 10); }, 3);
        const double parallel = time_of([&] { oracle_reference(cube, 6.0, 10); }, 3);
        const auto a = oracle_reference_serial(cube, 6.0, 10);
        const auto b = oracle_reference(cube, 6.0, 10);
        const bool equal = (a.f_ref - b.f_ref).norm() == 0.0 &&
                           a.n_candidates == b.n_candidates;
        std::printf("oracle scan   64x64x16       serial %.3f ms  openmp %.3f ms  "
                    "speedup %.2fx  equal %s\n",
                    serial * 1e3, parallel * 1e3, serial / parallel,
                    equal ? "yes" : "NO");
    }

    // --- per-sweep scaling table ------------------------------------------
    {
        std::printf("\nminvolfit per-sweep scaling (median of 3 reps):\n");
        std::printf("%6s %6s %6s %10s %14s\n", "K", "N", "M", "pixels", "sec/sweep");
        const auto rows = wallclock_scaling_probe(
            {{10, 25, 30}, {10, 50, 30}, {20, 25, 30}, {10, 25, 60}}, 200, 3, 99);
        for (const auto& r : rows)
            std::printf("%6d %6d %6d %10ld %14.3e\n", r.K, r.N, r.M, r.total_pixels,
                        r.sec_per_sweep);
    }
    return 0;
}
