#pragma once

#include <filesystem>
#include <vector>

#include "ctsev/image.hpp"
#include "ctsev/lung.hpp"
#include "ctsev/scan.hpp"

namespace ctsev {

/// Free parameters of the infection-extraction pipeline. The intensity band
/// and minimum areas are calibrated on the synthetic phantoms and are fully
/// configurable.
struct InfectionParams {
    double hyper_c = 0.5;
    double gaussian_sigma = 0.5;
    double band_lo = 0.40;
    double band_hi = 0.72;
    int noise_min_area = 50;
    int vessel_min_area = 30;
    StructuringElement kernel{3, 3};
    /// Below this between-class-variance maximum (normalized intensity^2
    /// units) a histogram counts as near-constant and yields an empty mask.
    double otsu_guard = 1e-6;

    void validate() const {
        if (!(hyper_c > 0.0)) throw DataError("InfectionParams: hyper_c must be > 0");
        if (!(gaussian_sigma > 0.0)) throw DataError("InfectionParams: gaussian_sigma must be > 0");
        if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi <= 1.0))
            throw DataError("InfectionParams: need 0 <= band_lo < band_hi <= 1");
        if (noise_min_area <= 0 || vessel_min_area <= 0)
            throw DataError("InfectionParams: minimum areas must be > 0");
        if (!(otsu_guard >= 0.0)) throw DataError("InfectionParams: otsu_guard must be >= 0");
        kernel.validate();
    }
};

/// Per-slice outcome of the pipeline.
struct SliceResult {
    int index = 0;
    BinaryMask lung;
    BinaryMask infection;
    double left_rate = 0.0;
    double right_rate = 0.0;
    bool retained = false;
};

/// Optional sink for intermediate images of each retained slice.
struct DebugSink {
    std::filesystem::path directory;
    bool enabled = false;
};

/// Extracts the infection mask of one slice. The result is always contained
/// in the lung mask.
BinaryMask segment_infection(const GrayImage& slice, const BinaryMask& lung_mask,
                             const InfectionParams& params, const DebugSink& debug = {},
                             int slice_index = 0);

/// Runs gating and infection extraction over a whole scan. One SliceResult
/// per slice, in slice order; rates are 0 for rejected slices.
std::vector<SliceResult> process_scan(const ScanVolume& scan,
                                      const std::vector<BinaryMask>& lung_masks,
                                      const GateParams& gate, const InfectionParams& params,
                                      int threads = 0, const DebugSink& debug = {});

} // namespace ctsev
