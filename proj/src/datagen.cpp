#include "unmix/datagen.hpp"

#include "unmix/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unmix {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ============================================================================
// Synthetic bags
// ============================================================================

void SynthConfig::validate() const {
    if (K < 1) throw InvalidInputError("SynthConfig: K must be >= 1");
    if (N < 2) throw InvalidInputError("SynthConfig: N must be >= 2");
    if (M < 3) throw InvalidInputError("SynthConfig: M must be >= 3");
    if (r < 0.0) throw InvalidInputError("SynthConfig: r must be >= 0");
    if (p < 0.0 || p > 1.0) throw InvalidInputError("SynthConfig: p must be in [0, 1]");
    if (!(snr > 0.0)) throw InvalidInputError("SynthConfig: snr must be positive");
}

namespace {

bool independent_of_one_and_square(const Vec& f) {
    Mat B(f.size(), 3);
    B.col(0).setOnes();
    B.col(1) = f;
    B.col(2) = f.cwiseProduct(f);
    Eigen::JacobiSVD<Mat> svd(B);
    const auto& sv = svd.singularValues();
    return sv(2) > 1e-10 * sv(0);
}

}  // namespace

std::pair<PatchSet, GroundTruth> generate_bag(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    Vec f(cfg.M);
    int attempts = 0;
    do {
        if (++attempts > 100)
            throw NumericError("generate_bag: could not draw an independent f", 0);
        for (int i = 0; i < cfg.M; ++i) f(i) = rng.uniform(0.5, 1.5);
    } while (!independent_of_one_and_square(f));

    Vec shared(cfg.M);
    for (int i = 0; i < cfg.M; ++i) shared(i) = rng.uniform(0.5, 1.5);

    GroundTruth truth;
    truth.params.f = f;
    truth.params.v.resize(cfg.K);
    truth.params.C.resize(cfg.K);

    for (int k = 0; k < cfg.K; ++k) {
        Vec individual(cfg.M);
        for (int i = 0; i < cfg.M; ++i) individual(i) = rng.uniform(0.5, 1.5);
        truth.params.v[k] = shared + cfg.r * individual;

        const bool tight = rng.uniform01() < cfg.p;
        // Endpoint columns occupy the leading slots: product-vector endpoint
        // first in the strict setting, a uniformly chosen side otherwise.
        int product_col = -1, background_col = -1;
        if (tight) {
            if (cfg.is_strict) {
                product_col = 0;
                background_col = 1;
            } else if (rng.uniform01() < 0.5) {
                product_col = 0;
            } else {
                background_col = 0;
            }
        }

        CoefMat C(2, cfg.N);
        for (int j = 0; j < cfg.N; ++j) {
            if (j == product_col) {
                const double kp = rng.uniform(0.5, 2.0);
                C(0, j) = kp;
                C(1, j) = 0.0;
            } else if (j == background_col) {
                const double kp = rng.uniform(0.5, 2.0);
                C(0, j) = 0.0;
                C(1, j) = kp;
            } else {
                const double a = rng.uniform(0.05, 0.95);
                const double kp = rng.uniform(0.5, 2.0);
                C(0, j) = kp * a;
                C(1, j) = kp * (1.0 - a);
            }
        }
        truth.params.C[k] = C;
    }

    PatchSet bag = reconstruct(truth.params);
    truth.sigma2 = std::isinf(cfg.snr) ? 0.0 : snr_to_sigma2(bag, cfg.snr);
    if (truth.sigma2 > 0.0) {
        const double sigma = std::sqrt(truth.sigma2);
        for (auto& patch : bag.patches)
            for (int j = 0; j < patch.pixels(); ++j)
                for (int i = 0; i < patch.bands(); ++i)
                    patch.data(i, j) += sigma * rng.normal();
    }
    return {std::move(bag), std::move(truth)};
}

double snr_to_sigma2(const PatchSet& data, double snr) {
    if (!(snr > 0.0)) throw DomainError("snr_to_sigma2: snr must be positive");
    const long n = data.total_pixels();
    if (data.patches.empty() || n == 0)
        throw DomainError("snr_to_sigma2: empty data");
    if (std::isinf(snr)) return 0.0;
    const double mean_sq =
        data.squared_norm() / (static_cast<double>(n) * data.bands());
    return mean_sq / snr;
}

// ============================================================================
// Metrics
// ============================================================================

double angular_difference(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DimensionError("angular_difference: size mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DomainError("angular_difference: zero vector");
    // Chord form of the same angle: acos of the cosine loses ~1e-6 degrees of
    // precision near parallel vectors, which the identities here cannot afford.
    const double half_chord = 0.5 * (u / nu - v / nv).norm();
    return 2.0 * std::asin(std::min(half_chord, 1.0)) * 180.0 / kPi;
}

double nmse(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DimensionError("nmse: size mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw DomainError("nmse: zero vector");
    return (u / nu - v / nv).squaredNorm();
}

double angle_from_nmse(double m) {
    if (m < 0.0 || m > 4.0) throw DomainError("angle_from_nmse: m must be in [0, 4]");
    return 2.0 * std::asin(std::sqrt(m) / 2.0) * 180.0 / kPi;
}

double signature_error(const Vec& f_est, const Vec& f_true) {
    if ((f_est.array() <= 0.0).any() || (f_true.array() <= 0.0).any())
        throw DomainError("signature_error: vectors must be strictly positive");
    const double direct = angular_difference(f_est, f_true);
    const double inverse = angular_difference(f_est.cwiseInverse(), f_true);
    return std::min(direct, inverse);
}

// ============================================================================
// Aggregation
// ============================================================================

double median_lower(std::vector<double> values) {
    if (values.empty()) throw InvalidInputError("median_lower: empty group");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

std::vector<MedianRow> median_by(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw InvalidInputError("median_by: no records");
    std::map<std::tuple<std::string, double, double>, std::vector<double>> groups;
    for (const auto& r : records)
        groups[{r.algorithm, r.lambda_or_alpha, r.snr}].push_back(
            r.angular_difference_deg);
    std::vector<MedianRow> rows;
    rows.reserve(groups.size());
    for (auto& [key, vals] : groups) {
        MedianRow row;
        row.algorithm = std::get<0>(key);
        row.lambda_or_alpha = std::get<1>(key);
        row.snr = std::get<2>(key);
        row.count = static_cast<int>(vals.size());
        row.median_deg = median_lower(std::move(vals));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ============================================================================
// Labeled cubes
// ============================================================================

Vec LabeledCube::pixel(int x, int y) const {
    const long idx = (static_cast<long>(y) * width + x) * bands;
    Vec out(bands);
    for (int b = 0; b < bands; ++b) out(b) = image[idx + b];
    return out;
}

void LabeledCube::validate() const {
    if (width < 1 || height < 1 || bands < 1)
        throw DimensionError("LabeledCube: bad shape");
    if (static_cast<long>(image.size()) != pixel_count() * bands)
        throw DimensionError("LabeledCube: image size mismatch");
    if (static_cast<long>(labels.size()) != pixel_count())
        throw DimensionError("LabeledCube: label size mismatch");
    if (static_cast<long>(foreground.size()) != pixel_count())
        throw DimensionError("LabeledCube: foreground plane size mismatch");
}

PatchSet sample_patches(const LabeledCube& cube, int window, int stride,
                        SampleStats* stats) {
    cube.validate();
    if (stride < 1) throw InvalidInputError("sample_patches: stride must be >= 1");
    if (window < 2) throw InvalidInputError("sample_patches: window must be >= 2");
    if (window > cube.width || window > cube.height)
        throw DimensionError("sample_patches: window larger than image");

    PatchSet out;
    SampleStats local;
    for (int y0 = 0; y0 + window <= cube.height; y0 += stride) {
        for (int x0 = 0; x0 + window <= cube.width; x0 += stride) {
            const std::uint16_t label = cube.labels[static_cast<long>(y0) * cube.width + x0];
            bool pure = true;
            for (int dy = 0; dy < window && pure; ++dy)
                for (int dx = 0; dx < window; ++dx)
                    if (cube.labels[static_cast<long>(y0 + dy) * cube.width + (x0 + dx)] !=
                        label) {
                        pure = false;
                        break;
                    }
            if (!pure) {
                ++local.discarded;
                continue;
            }
            Patch patch;
            patch.data.resize(cube.bands, window * window);
            int col = 0;
            for (int dy = 0; dy < window; ++dy)
                for (int dx = 0; dx < window; ++dx)
                    patch.data.col(col++) = cube.pixel(x0 + dx, y0 + dy);
            out.patches.push_back(std::move(patch));
            ++local.kept;
        }
    }
    if (stats) *stats = local;
    return out;
}

// ============================================================================
// Real-data oracle
// ============================================================================

namespace {

struct Candidate {
    double vol;
    long order;  // (fg index, bg index) rank for deterministic ties
    int fi, bj;
};

Vec oracle_candidate(const LabeledCube& cube, int fg_idx, int bg_idx, double floor,
                     long* floored) {
    const int fx = fg_idx % cube.width, fy = fg_idx / cube.width;
    const int bx = bg_idx % cube.width, by = bg_idx / cube.width;
    Vec num = cube.pixel(fx, fy);
    Vec den = cube.pixel(bx, by);
    long events = 0;
    for (int b = 0; b < cube.bands; ++b) {
        if (den(b) < floor) {
            den(b) = floor;
            ++events;
        }
    }
    Vec ratio = num.cwiseQuotient(den);
    for (int b = 0; b < cube.bands; ++b) {
        if (ratio(b) < floor) {
            ratio(b) = floor;
            ++events;
        }
    }
    if (floored) *floored += events;
    return ratio;
}

OracleResult oracle_impl(const LabeledCube& cube, double max_dist, int top_k,
                         double floor, bool parallel) {
    cube.validate();
    if (top_k < 1) throw InvalidInputError("oracle_reference: top_k must be >= 1");
    if (max_dist <= 0.0)
        throw InvalidInputError("oracle_reference: max_dist must be positive");

    std::vector<int> fg, bg;
    for (long i = 0; i < cube.pixel_count(); ++i)
        (cube.foreground[i] ? fg : bg).push_back(static_cast<int>(i));

    const double d2max = max_dist * max_dist;
    const int nf = static_cast<int>(fg.size());

    // Pass 1: volumes only (vectors are recomputed for the selected top k).
    std::vector<std::vector<Candidate>> per_fg(nf);
    std::vector<long> floor_events(std::max(nf, 1), 0);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
    for (int a = 0; a < nf; ++a) {
        const int i = fg[a];
        const int fx = i % cube.width, fy = i / cube.width;
        for (int j : bg) {
            const int bx = j % cube.width, by = j / cube.width;
            const double dx = fx - bx, dy = fy - by;
            if (dx * dx + dy * dy >= d2max) continue;
            Vec cand = oracle_candidate(cube, i, j, floor, &floor_events[a]);
            per_fg[a].push_back({volume(cand), 0, i, j});
        }
    }

    std::vector<Candidate> all;
    long flooring = 0;
    for (int a = 0; a < nf; ++a) {
        for (auto& c : per_fg[a]) {
            c.order = static_cast<long>(all.size());
            all.push_back(c);
        }
        flooring += floor_events[a];
    }
    if (all.empty())
        throw EmptyOracleError("oracle_reference: no qualifying pixel pair");

    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
        return a.vol != b.vol ? a.vol < b.vol : a.order < b.order;
    });

    const int take = std::min<long>(top_k, static_cast<long>(all.size()));
    Vec mean = Vec::Zero(cube.bands);
    for (int t = 0; t < take; ++t)
        mean += oracle_candidate(cube, all[t].fi, all[t].bj, floor, nullptr);
    mean /= static_cast<double>(take);

    OracleResult out;
    out.f_ref = mean;
    out.n_candidates = static_cast<long>(all.size());
    out.flooring_events = flooring;
    return out;
}

}  // namespace

OracleResult oracle_reference(const LabeledCube& cube, double max_dist, int top_k,
                              double floor) {
    return oracle_impl(cube, max_dist, top_k, floor, true);
}

OracleResult oracle_reference_serial(const LabeledCube& cube, double max_dist,
                                     int top_k, double floor) {
    return oracle_impl(cube, max_dist, top_k, floor, false);
}

}  // namespace unmix
