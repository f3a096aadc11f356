#pragma once

#include "unmix/model.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace unmix {

// ============================================================================
// Synthetic bag generation
// ============================================================================

struct SynthConfig {
    int K = 10;            // patches per bag
    int N = 25;            // pixels per patch
    int M = 30;            // bands
    double r = 1.0;        // individual background component weight
    double p = 0.5;        // probability a patch is tight
    bool is_strict = false;
    double snr = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    ModelParams params;  // pre-noise truth
    double sigma2 = 0.0;
};

/// Draws one bag: shared foreground f ~ U(0.5, 1.5) (redrawn until 1, f, f.*f
/// are independent), per-patch backgrounds shared + r * individual, endpoint
/// columns per the tightness setting, interior coefficient directions uniform
/// on [0.05, 0.95] with per-pixel scale U(0.5, 2), then i.i.d. Gaussian noise.
std::pair<PatchSet, GroundTruth> generate_bag(const SynthConfig& cfg);

/// Noise variance: mean squared entry of the bag divided by snr.
double snr_to_sigma2(const PatchSet& data, double snr);

// ============================================================================
// Metrics
// ============================================================================

/// Angle between u and v in degrees, in [0, 180] (chord form, exact near 0).
double angular_difference(const Vec& u, const Vec& v);

/// || u/||u|| - v/||v|| ||^2, in [0, 4].
double nmse(const Vec& u, const Vec& v);

/// 2 asin(sqrt(m)/2) * 180/pi for m in [0, 4].
double angle_from_nmse(double m);

/// min(angle(f_est, f_true), angle(1./f_est, f_true)); both vectors must be
/// strictly positive.
double signature_error(const Vec& f_est, const Vec& f_true);

// ============================================================================
// Records and aggregation
// ============================================================================

struct EvalRecord {
    std::string algorithm;
    double lambda_or_alpha = 0.0;
    double snr = 0.0;
    int bag_id = 0;
    std::uint64_t seed = 0;
    double angular_difference_deg = 0.0;
};

struct MedianRow {
    std::string algorithm;
    double lambda_or_alpha = 0.0;
    double snr = 0.0;
    double median_deg = 0.0;
    int count = 0;
};

/// Lower-middle median convention for even counts.
double median_lower(std::vector<double> values);

/// Groups by (algorithm, lambda_or_alpha, snr) and reports the median angular
/// difference per group, sorted by key.
std::vector<MedianRow> median_by(const std::vector<EvalRecord>& records);

// ============================================================================
// Labeled cubes (real-data carrier)
// ============================================================================

struct LabeledCube {
    int width = 0, height = 0, bands = 0;
    std::vector<std::string> label_names;
    std::vector<float> image;          // band-interleaved by pixel, row-major pixels
    std::vector<std::uint16_t> labels; // background id per pixel
    std::vector<std::uint8_t> foreground;  // 1 if the pixel contains foreground

    long pixel_count() const { return static_cast<long>(width) * height; }
    Vec pixel(int x, int y) const;
    void validate() const;
};

struct SampleStats {
    long kept = 0;
    long discarded = 0;
};

/// Slides a window x window square with the given stride; windows overlapping
/// more than one background label are discarded.
PatchSet sample_patches(const LabeledCube& cube, int window, int stride,
                        SampleStats* stats = nullptr);

struct OracleResult {
    Vec f_ref;
    long n_candidates = 0;
    long flooring_events = 0;
};

/// Foreground/background pixel pairs within max_dist (Euclidean grid
/// distance); candidates X_i ./ X_j sorted by volume ascending, mean of the
/// top_k lowest-volume candidates.
OracleResult oracle_reference(const LabeledCube& cube, double max_dist, int top_k,
                              double floor = 1e-9);
/// Serial reference for the OpenMP version above; identical output.
OracleResult oracle_reference_serial(const LabeledCube& cube, double max_dist,
                                     int top_k, double floor = 1e-9);

}  // namespace unmix
