#include "ctsev/infection.hpp"

#include <string>

#include "ctsev/errors.hpp"
#include "ctsev/image_io.hpp"
#include "ctsev/imaging.hpp"
#include "ctsev/parallel.hpp"

namespace ctsev {

namespace {

/// Otsu over the masked histogram with a near-constant guard: an empty mask
/// when fewer than two bins are occupied or the best split is too weak.
BinaryMask guarded_otsu(const GrayImage& img, const BinaryMask& domain, double guard) {
    BinaryMask out(img.width(), img.height());
    const auto res = otsu_analyze(histogram(img, domain));
    if (!res || res->between_class_variance < guard) return out;
    for (std::size_t i = 0; i < img.size(); ++i)
        out.set(i, domain.get(i) && intensity_bin(img[i]) > res->threshold);
    return out;
}

void dump(const DebugSink& debug, int slice_index, const std::string& stage,
          const GrayImage& img) {
    if (!debug.enabled) return;
    std::filesystem::create_directories(debug.directory);
    save_gray_png(img, debug.directory /
                           (std::to_string(slice_index) + "_" + stage + ".png"));
}

void dump(const DebugSink& debug, int slice_index, const std::string& stage,
          const BinaryMask& mask) {
    if (!debug.enabled) return;
    std::filesystem::create_directories(debug.directory);
    save_mask_png(mask, debug.directory /
                            (std::to_string(slice_index) + "_" + stage + ".png"));
}

} // namespace

BinaryMask segment_infection(const GrayImage& slice, const BinaryMask& lung_mask,
                             const InfectionParams& params, const DebugSink& debug,
                             int slice_index) {
    params.validate();
    if (!lung_mask.same_geometry(slice))
        throw DataError("segment_infection: lung mask geometry mismatch");

    BinaryMask empty(slice.width(), slice.height());
    if (lung_mask.count() == 0) return empty;

    GrayImage seg = apply_mask(slice, lung_mask);
    const BinaryMask band = intensity_band_filter(seg, params.band_lo, params.band_hi);
    const BinaryMask domain = mask_and(band, lung_mask);
    if (domain.count() == 0) return empty;
    seg = apply_mask(seg, domain);
    dump(debug, slice_index, "seg", seg);

    const GrayImage hyper =
        hyperbolize(gaussian_smooth(seg, params.gaussian_sigma), domain, {params.hyper_c});
    dump(debug, slice_index, "hyper", hyper);

    const BinaryMask binarized = guarded_otsu(hyper, domain, params.otsu_guard);
    const BinaryMask core =
        area_filter(open(binarized, params.kernel), static_cast<std::size_t>(params.noise_min_area));

    const BinaryMask vessel =
        area_filter(guarded_otsu(top_hat(hyper, params.kernel), domain, params.otsu_guard),
                    static_cast<std::size_t>(params.vessel_min_area));
    dump(debug, slice_index, "vessel", vessel);

    const BinaryMask temp = mask_subtract(core, vessel);
    const BinaryMask result =
        mask_and(dilate(fill_holes(temp), params.kernel), lung_mask);
    dump(debug, slice_index, "infection", result);
    return result;
}

std::vector<SliceResult> process_scan(const ScanVolume& scan,
                                      const std::vector<BinaryMask>& lung_masks,
                                      const GateParams& gate, const InfectionParams& params,
                                      int threads, const DebugSink& debug) {
    if (scan.slices.empty()) throw DataError("process_scan: empty scan");
    if (lung_masks.size() != scan.slices.size())
        throw InternalError("process_scan: lung mask count mismatch");
    params.validate();
    gate.validate();

    const int n = scan.n_slices();
    std::vector<SliceResult> results(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        const auto& lung = lung_masks[i];
        if (!lung.same_geometry(scan.slices[i]))
            throw DataError("process_scan: lung mask geometry mismatch at slice " +
                            std::to_string(i));
        SliceResult r;
        r.index = static_cast<int>(i);
        r.lung = lung;
        r.retained = slice_gate(lung, static_cast<int>(i), n, gate);
        if (r.retained) {
            r.infection = segment_infection(scan.slices[i], lung, params, debug,
                                            static_cast<int>(i));
            const auto [left, right] = split_left_right(lung);
            const std::size_t left_n = left.count();
            const std::size_t right_n = right.count();
            if (left_n > 0)
                r.left_rate = static_cast<double>(mask_and(r.infection, left).count()) /
                              static_cast<double>(left_n);
            if (right_n > 0)
                r.right_rate = static_cast<double>(mask_and(r.infection, right).count()) /
                               static_cast<double>(right_n);
        } else {
            r.infection = BinaryMask(scan.slices[i].width(), scan.slices[i].height());
        }
        results[i] = std::move(r);
    });
    return results;
}

} // namespace ctsev
