#include "ctsev/lung.hpp"

#include <algorithm>

#include "ctsev/errors.hpp"
#include "ctsev/image_io.hpp"
#include "ctsev/imaging.hpp"
#include "ctsev/parallel.hpp"

namespace ctsev {

bool slice_gate_area(std::uint64_t area, int index, int n_slices, int width, int height,
                     const GateParams& params) {
    params.validate();
    const double image_area = static_cast<double>(width) * height;
    const double scaled_min = params.min_mask_area * image_area / (512.0 * 512.0);
    const bool area_ok = static_cast<double>(area) >= scaled_min;
    const bool in_band = 3 * static_cast<std::int64_t>(index) >= n_slices &&
                         3 * static_cast<std::int64_t>(index) <= 2 * static_cast<std::int64_t>(n_slices);
    const bool large = static_cast<double>(area) >= params.large_area_fraction * image_area;
    return (area_ok && in_band) || large;
}

bool slice_gate(const BinaryMask& mask, int index, int n_slices, const GateParams& params) {
    return slice_gate_area(mask.count(), index, n_slices, mask.width(), mask.height(), params);
}

BinaryMask classical_lung_segment(const GrayImage& img, double air_threshold) {
    BinaryMask candidate(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        candidate.set(i, img[i] < air_threshold);

    // Drop air regions connected to the image border.
    const Labeling lab = connected_components(candidate);
    std::vector<bool> border_touch(lab.stats.size() + 1, false);
    for (const auto& st : lab.stats)
        border_touch[st.label] = st.x_min == 0 || st.y_min == 0 ||
                                 st.x_max == img.width() - 1 || st.y_max == img.height() - 1;

    std::vector<ComponentStats> interior;
    for (const auto& st : lab.stats)
        if (!border_touch[st.label]) interior.push_back(st);
    std::sort(interior.begin(), interior.end(), [](const auto& a, const auto& b) {
        if (a.area != b.area) return a.area > b.area;
        return a.label < b.label;
    });
    if (interior.size() > 2) interior.resize(2);

    BinaryMask kept(img.width(), img.height());
    if (!interior.empty()) {
        std::vector<bool> keep(lab.stats.size() + 1, false);
        for (const auto& st : interior) keep[st.label] = true;
        for (std::size_t i = 0; i < kept.size(); ++i)
            kept.set(i, lab.labels[i] > 0 && keep[lab.labels[i]]);
    }
    return close(fill_holes(kept));
}

std::pair<BinaryMask, BinaryMask> split_left_right(const BinaryMask& mask) {
    BinaryMask left(mask.width(), mask.height());
    BinaryMask right(mask.width(), mask.height());
    const Labeling lab = connected_components(mask);
    if (lab.stats.empty()) return {left, right};

    if (lab.stats.size() >= 2) {
        double sum_x = 0.0;
        std::uint64_t total = 0;
        for (const auto& st : lab.stats) {
            sum_x += st.centroid_x * static_cast<double>(st.area);
            total += st.area;
        }
        const double overall_x = sum_x / static_cast<double>(total);
        std::vector<bool> to_right(lab.stats.size() + 1, false);
        for (const auto& st : lab.stats)
            to_right[st.label] = st.centroid_x < overall_x;
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                const int lbl = lab.labels[static_cast<std::size_t>(y) * mask.width() + x];
                if (lbl == 0) continue;
                (to_right[lbl] ? right : left).set(x, y, true);
            }
        return {left, right};
    }

    // Single component: split at the bounding-box vertical midline; the
    // midline column itself goes to the viewer-left (right lung) side.
    const auto& st = lab.stats.front();
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.get(x, y)) continue;
            (2 * x <= st.x_min + st.x_max ? right : left).set(x, y, true);
        }
    return {left, right};
}

std::vector<BinaryMask> resolve_lung_masks(const ScanVolume& scan, const MaskSource& source,
                                           int threads) {
    const int n = scan.n_slices();
    std::vector<BinaryMask> masks(static_cast<std::size_t>(n));

    if (source.kind == MaskSource::Kind::external_directory) {
        if (!std::filesystem::is_directory(source.directory))
            throw DataError("lung mask directory not found: " + source.directory.string());
        for (int i = 0; i < n; ++i) {
            std::filesystem::path p = source.directory / scan.slice_names[i];
            if (!std::filesystem::exists(p))
                p = (source.directory / std::filesystem::path(scan.slice_names[i]).stem())
                        .concat(".png");
            if (!std::filesystem::exists(p))
                throw DataError("missing lung mask for slice " + scan.slice_names[i] + " in " +
                                source.directory.string());
            masks[i] = load_mask(p);
            if (!masks[i].same_geometry(scan.slices[i]))
                throw DataError("lung mask geometry mismatch for slice " + scan.slice_names[i]);
        }
        return masks;
    }

    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        masks[i] = classical_lung_segment(scan.slices[i], source.air_threshold);
    });
    return masks;
}

} // namespace ctsev
