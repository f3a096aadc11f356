#pragma once

#include "unmix/datagen.hpp"
#include "unmix/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace unmix {

// ============================================================================
// Bag files
// ============================================================================
// One JSON manifest line, then a little-endian float64 payload: patches
// concatenated column-major (band index fastest), then optionally the ground
// truth parameters (f, v^(1..K), C^(1..K) row-major).

struct BagFileContents {
    PatchSet bag;
    std::optional<ModelParams> truth;
};

void write_bag_file(const std::string& path, const PatchSet& bag,
                    const ModelParams* truth = nullptr);

BagFileContents read_bag_file(const std::string& path);

// ============================================================================
// Cube files
// ============================================================================
// One JSON header line, then: image as little-endian float32 band-interleaved
// by pixel (row-major pixels), then one uint16 background id per pixel, then
// one byte (0/1) foreground flag per pixel.

void write_cube_file(const std::string& path, const LabeledCube& cube);

LabeledCube read_cube_file(const std::string& path);

// ============================================================================
// Tables
// ============================================================================

std::string format_double(double v);  // round-trip-exact %.17g

void write_records_csv(const std::string& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records_csv(const std::string& path);

void write_medians_csv(const std::string& path, const std::vector<MedianRow>& rows);

/// Two-column (snr, median degrees) plot data for one curve, ordered by SNR.
void write_curve_csv(const std::string& path, const std::vector<MedianRow>& curve);

}  // namespace unmix
