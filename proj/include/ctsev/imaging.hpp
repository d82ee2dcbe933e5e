#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "ctsev/image.hpp"

namespace ctsev {

using Histogram = std::array<std::uint64_t, 256>;

/// Parameters of the hyperbolic contrast response J(u) = c*(exp(log(1+1/c)*u)-1).
struct HyperbolizationParams {
    double c = 0.5;

    void validate() const {
        if (!(c > 0.0))
            throw std::invalid_argument("HyperbolizationParams: c must be > 0");
    }
};

// ---------------------------------------------------------------------------
// Smoothing and contrast
// ---------------------------------------------------------------------------

/// Separable Gaussian smoothing, kernel radius ceil(3*sigma), edge replication.
/// Output intensities clamped to [0, 1].
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

/// 256-bin intensity histogram; optionally restricted to a mask.
Histogram histogram(const GrayImage& img);
Histogram histogram(const GrayImage& img, const BinaryMask& mask);

/// Normalized cumulative histogram: monotone nondecreasing, last entry 1 for
/// any nonempty pixel set. A mask selecting zero pixels yields all zeros.
std::array<double, 256> histogram_cdf(const GrayImage& img);
std::array<double, 256> histogram_cdf(const GrayImage& img, const BinaryMask& mask);

/// The hyperbolic response itself, defined on u in [0, 1].
/// Maps 0 -> 0 and 1 -> 1 exactly for every c > 0.
double hyperbolic_response(double u, double c);

/// Contrast enhancement: each pixel is mapped through hyperbolic_response at
/// its normalized cumulative-histogram value.
GrayImage hyperbolize(const GrayImage& img, const HyperbolizationParams& params);

/// Masked variant: the cumulative histogram is computed over masked pixels
/// only and unmasked pixels are set to 0.
GrayImage hyperbolize(const GrayImage& img, const BinaryMask& mask,
                      const HyperbolizationParams& params);

// ---------------------------------------------------------------------------
// Binarization
// ---------------------------------------------------------------------------

struct OtsuResult {
    int threshold = 0;              // foreground is bin > threshold
    double between_class_variance = 0.0; // in normalized intensity^2 units
};

/// Exhaustive-equivalent Otsu split of a 256-bin histogram. Returns nullopt
/// when fewer than two bins are occupied. Ties break toward the smallest
/// maximizing threshold.
std::optional<OtsuResult> otsu_analyze(const Histogram& hist);

/// Otsu binarization over the whole image. Throws DataError on a histogram
/// with fewer than two occupied bins.
std::pair<int, BinaryMask> otsu_threshold(const GrayImage& img);

/// Masked variant: histogram over masked pixels; unmasked pixels are false.
std::pair<int, BinaryMask> otsu_threshold(const GrayImage& img, const BinaryMask& mask);

/// Mask of pixels with lo <= value <= hi. Requires 0 <= lo < hi <= 1.
BinaryMask intensity_band_filter(const GrayImage& img, double lo, double hi);

// ---------------------------------------------------------------------------
// Morphology (masks: out-of-bounds neighbors are false; grayscale: edge
// replication)
// ---------------------------------------------------------------------------

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se = {});
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se = {});
BinaryMask open(const BinaryMask& mask, const StructuringElement& se = {});
BinaryMask close(const BinaryMask& mask, const StructuringElement& se = {});

GrayImage grayscale_dilate(const GrayImage& img, const StructuringElement& se = {});
GrayImage grayscale_erode(const GrayImage& img, const StructuringElement& se = {});
GrayImage grayscale_open(const GrayImage& img, const StructuringElement& se = {});

/// White top-hat: img - grayscale_open(img), clamped at 0.
GrayImage top_hat(const GrayImage& img, const StructuringElement& se = {});

// ---------------------------------------------------------------------------
// Components and holes
// ---------------------------------------------------------------------------

struct Labeling {
    std::vector<int> labels; // 0 = background, 1..K dense component ids
    std::vector<ComponentStats> stats;
};

/// 8-connectivity labeling; labels are dense 1..K in raster scan order of
/// each component's first pixel.
Labeling connected_components(const BinaryMask& mask);

/// Keeps exactly the components with area >= min_area.
BinaryMask area_filter(const BinaryMask& mask, std::size_t min_area);

/// Sets true every background region not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Mask set algebra
// ---------------------------------------------------------------------------

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
/// a minus b, clamped at false.
BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_complement(const BinaryMask& a);

/// Zeroes image pixels outside the mask.
GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask);

} // namespace ctsev
