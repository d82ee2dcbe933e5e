#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "ctsev/image.hpp"
#include "ctsev/scan.hpp"

namespace ctsev {

/// Slice-retention gate parameters. The pixel thresholds are stated for a
/// 512x512 slice and scale with the actual image area.
struct GateParams {
    int min_mask_area = 10000;
    double large_area_fraction = 0.7;

    void validate() const {
        if (min_mask_area <= 0)
            throw DataError("GateParams: min_mask_area must be > 0");
        if (!(large_area_fraction > 0.0 && large_area_fraction <= 1.0))
            throw DataError("GateParams: large_area_fraction must be in (0, 1]");
    }
};

/// Where per-slice lung masks come from.
struct MaskSource {
    enum class Kind { external_directory, classical_fallback };

    Kind kind = Kind::classical_fallback;
    std::filesystem::path directory;  // external_directory only
    double air_threshold = 0.35;      // classical_fallback only
};

/// Retention predicate on the mask area and slice position:
/// (area >= scaled min_mask_area AND n/3 <= index <= 2n/3) OR
/// (area >= large_area_fraction * image area).
/// The position band uses exact integer arithmetic (3*index vs n).
bool slice_gate_area(std::uint64_t area, int index, int n_slices, int width, int height,
                     const GateParams& params = {});

bool slice_gate(const BinaryMask& mask, int index, int n_slices,
                const GateParams& params = {});

/// Threshold-based lung extraction: air-like pixels below air_threshold,
/// border-connected background removed, the two largest components kept,
/// holes filled, then a 3x3 close. An empty result is legal.
BinaryMask classical_lung_segment(const GrayImage& img, double air_threshold = 0.35);

/// Partition into (left lung, right lung) in the radiological convention:
/// the right lung is the viewer-left half. With two or more components each
/// goes to the side of its centroid relative to the overall centroid-x; a
/// single component splits at its bounding-box vertical midline.
std::pair<BinaryMask, BinaryMask> split_left_right(const BinaryMask& mask);

/// One lung mask per slice, from external files or the classical fallback.
/// External masks must match the scan's filenames and geometry.
std::vector<BinaryMask> resolve_lung_masks(const ScanVolume& scan, const MaskSource& source,
                                           int threads = 0);

} // namespace ctsev
