#include "ctsev/imaging.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace ctsev {

namespace {

void require_same_geometry(const GrayImage& img, const BinaryMask& mask, const char* op) {
    if (!mask.same_geometry(img))
        throw DataError(std::string(op) + ": image and mask geometry mismatch");
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

} // namespace

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_smooth: sigma must be > 0");
    const int w = img.width();
    const int h = img.height();
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;

    // Horizontal pass with edge replication.
    GrayImage tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] * img.at(xx, y);
            }
            tmp.at(x, y) = acc;
        }
    }
    // Vertical pass.
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(x, yy);
            }
            out.at(x, y) = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

Histogram histogram(const GrayImage& img) {
    Histogram h{};
    for (double v : img.data()) ++h[static_cast<std::size_t>(intensity_bin(v))];
    return h;
}

Histogram histogram(const GrayImage& img, const BinaryMask& mask) {
    require_same_geometry(img, mask, "histogram");
    Histogram h{};
    for (std::size_t i = 0; i < img.size(); ++i)
        if (mask.get(i)) ++h[static_cast<std::size_t>(intensity_bin(img[i]))];
    return h;
}

namespace {

std::array<double, 256> cdf_from_histogram(const Histogram& hist) {
    std::array<double, 256> cdf{};
    const std::uint64_t total = std::accumulate(hist.begin(), hist.end(), std::uint64_t{0});
    if (total == 0) return cdf;
    std::uint64_t running = 0;
    for (std::size_t b = 0; b < 256; ++b) {
        running += hist[b];
        cdf[b] = static_cast<double>(running) / static_cast<double>(total);
    }
    cdf[255] = 1.0;
    return cdf;
}

} // namespace

std::array<double, 256> histogram_cdf(const GrayImage& img) {
    return cdf_from_histogram(histogram(img));
}

std::array<double, 256> histogram_cdf(const GrayImage& img, const BinaryMask& mask) {
    return cdf_from_histogram(histogram(img, mask));
}

double hyperbolic_response(double u, double c) {
    return c * (std::exp(std::log1p(1.0 / c) * u) - 1.0);
}

namespace {

GrayImage hyperbolize_with_cdf(const GrayImage& img, const std::array<double, 256>& cdf,
                               const BinaryMask* mask, double c) {
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (mask && !mask->get(i)) continue;
        const double u = cdf[static_cast<std::size_t>(intensity_bin(img[i]))];
        out[i] = std::clamp(hyperbolic_response(u, c), 0.0, 1.0);
    }
    return out;
}

} // namespace

GrayImage hyperbolize(const GrayImage& img, const HyperbolizationParams& params) {
    params.validate();
    return hyperbolize_with_cdf(img, histogram_cdf(img), nullptr, params.c);
}

GrayImage hyperbolize(const GrayImage& img, const BinaryMask& mask,
                      const HyperbolizationParams& params) {
    params.validate();
    require_same_geometry(img, mask, "hyperbolize");
    return hyperbolize_with_cdf(img, histogram_cdf(img, mask), &mask, params.c);
}

std::optional<OtsuResult> otsu_analyze(const Histogram& hist) {
    const std::uint64_t total = std::accumulate(hist.begin(), hist.end(), std::uint64_t{0});
    int occupied = 0;
    for (std::size_t b = 0; b < 256; ++b)
        if (hist[b] > 0) ++occupied;
    if (occupied < 2) return std::nullopt;

    // Bin value = b/255 so the reported variance is in normalized
    // intensity^2 units; the argmax is unaffected by the scaling.
    double weighted_sum = 0.0;
    for (std::size_t b = 0; b < 256; ++b)
        weighted_sum += static_cast<double>(hist[b]) * (static_cast<double>(b) / 255.0);

    OtsuResult best{0, -1.0};
    double w0 = 0.0;
    double sum0 = 0.0;
    const double total_d = static_cast<double>(total);
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist[static_cast<std::size_t>(t)]);
        sum0 += static_cast<double>(hist[static_cast<std::size_t>(t)]) *
                (static_cast<double>(t) / 255.0);
        const double w1 = total_d - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (weighted_sum - sum0) / w1;
        const double d = mu0 - mu1;
        const double variance = (w0 / total_d) * (w1 / total_d) * d * d;
        if (variance > best.between_class_variance) {
            best.threshold = t;
            best.between_class_variance = variance;
        }
    }
    return best;
}

namespace {

std::pair<int, BinaryMask> otsu_apply(const GrayImage& img, const BinaryMask* mask,
                                      const Histogram& hist) {
    const auto result = otsu_analyze(hist);
    if (!result)
        throw DataError("otsu_threshold: degenerate histogram (fewer than two occupied bins)");
    BinaryMask out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (mask && !mask->get(i)) continue;
        out.set(i, intensity_bin(img[i]) > result->threshold);
    }
    return {result->threshold, out};
}

} // namespace

std::pair<int, BinaryMask> otsu_threshold(const GrayImage& img) {
    return otsu_apply(img, nullptr, histogram(img));
}

std::pair<int, BinaryMask> otsu_threshold(const GrayImage& img, const BinaryMask& mask) {
    require_same_geometry(img, mask, "otsu_threshold");
    return otsu_apply(img, &mask, histogram(img, mask));
}

BinaryMask intensity_band_filter(const GrayImage& img, double lo, double hi) {
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
        throw std::invalid_argument("intensity_band_filter: require 0 <= lo < hi <= 1");
    BinaryMask out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        out.set(i, img[i] >= lo && img[i] <= hi);
    return out;
}

namespace {

BinaryMask mask_morph(const BinaryMask& mask, const StructuringElement& se, bool any_of) {
    se.validate();
    const int w = mask.width();
    const int h = mask.height();
    const int rx = se.width / 2;
    const int ry = se.height / 2;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // any_of: true iff any neighbor is set (dilate);
            // otherwise: true iff every neighbor is set (erode).
            bool result = !any_of;
            for (int dy = -ry; dy <= ry && result != any_of; ++dy) {
                for (int dx = -rx; dx <= rx; ++dx) {
                    if (mask.get_or_false(x + dx, y + dy) == any_of) {
                        result = any_of;
                        break;
                    }
                }
            }
            out.set(x, y, result);
        }
    }
    return out;
}

template <typename Pick>
GrayImage gray_morph(const GrayImage& img, const StructuringElement& se, Pick pick) {
    se.validate();
    const int w = img.width();
    const int h = img.height();
    const int rx = se.width / 2;
    const int ry = se.height / 2;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = img.at(x, y);
            for (int dy = -ry; dy <= ry; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -rx; dx <= rx; ++dx) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    acc = pick(acc, img.at(xx, yy));
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    return mask_morph(mask, se, true);
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    // Out-of-bounds neighbors count as false, so the border erodes.
    return mask_morph(mask, se, false);
}

BinaryMask open(const BinaryMask& mask, const StructuringElement& se) {
    return dilate(erode(mask, se), se);
}

BinaryMask close(const BinaryMask& mask, const StructuringElement& se) {
    return erode(dilate(mask, se), se);
}

GrayImage grayscale_dilate(const GrayImage& img, const StructuringElement& se) {
    return gray_morph(img, se, [](double a, double b) { return std::max(a, b); });
}

GrayImage grayscale_erode(const GrayImage& img, const StructuringElement& se) {
    return gray_morph(img, se, [](double a, double b) { return std::min(a, b); });
}

GrayImage grayscale_open(const GrayImage& img, const StructuringElement& se) {
    return grayscale_dilate(grayscale_erode(img, se), se);
}

GrayImage top_hat(const GrayImage& img, const StructuringElement& se) {
    const GrayImage opened = grayscale_open(img, se);
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = std::max(0.0, img[i] - opened[i]);
    return out;
}

Labeling connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    Labeling result;
    result.labels.assign(mask.size(), 0);

    static constexpr int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};

    int next_label = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!mask.get(idx) || result.labels[idx] != 0) continue;
            ++next_label;
            ComponentStats stats;
            stats.label = next_label;
            stats.x_min = stats.x_max = x;
            stats.y_min = stats.y_max = y;
            double sum_x = 0.0, sum_y = 0.0;

            result.labels[idx] = next_label;
            queue.clear();
            queue.emplace_back(x, y);
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                ++stats.area;
                sum_x += cx;
                sum_y += cy;
                stats.x_min = std::min(stats.x_min, cx);
                stats.x_max = std::max(stats.x_max, cx);
                stats.y_min = std::min(stats.y_min, cy);
                stats.y_max = std::max(stats.y_max, cy);
                for (int n = 0; n < 8; ++n) {
                    const int nx = cx + dx8[n];
                    const int ny = cy + dy8[n];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                    if (!mask.get(nidx) || result.labels[nidx] != 0) continue;
                    result.labels[nidx] = next_label;
                    queue.emplace_back(nx, ny);
                }
            }
            stats.centroid_x = sum_x / static_cast<double>(stats.area);
            stats.centroid_y = sum_y / static_cast<double>(stats.area);
            result.stats.push_back(stats);
        }
    }
    return result;
}

BinaryMask area_filter(const BinaryMask& mask, std::size_t min_area) {
    const Labeling labeling = connected_components(mask);
    std::vector<std::uint8_t> keep(labeling.stats.size() + 1, 0);
    for (const auto& s : labeling.stats)
        if (s.area >= min_area) keep[static_cast<std::size_t>(s.label)] = 1;
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i)
        out.set(i, labeling.labels[i] != 0 && keep[static_cast<std::size_t>(labeling.labels[i])]);
    return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    // Flood the background from the border with 4-connectivity; anything not
    // reached is an enclosed hole.
    std::vector<std::uint8_t> outside(mask.size(), 0);
    std::deque<std::pair<int, int>> queue;
    auto try_seed = [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        if (!mask.get(idx) && !outside[idx]) {
            outside[idx] = 1;
            queue.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        try_seed(x, 0);
        try_seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        try_seed(0, y);
        try_seed(w - 1, y);
    }
    static constexpr int dx4[] = {1, -1, 0, 0};
    static constexpr int dy4[] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int n = 0; n < 4; ++n) {
            const int nx = cx + dx4[n];
            const int ny = cy + dy4[n];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (mask.get(nidx) || outside[nidx]) continue;
            outside[nidx] = 1;
            queue.emplace_back(nx, ny);
        }
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < mask.size(); ++i)
        out.set(i, mask.get(i) || !outside[i]);
    return out;
}

namespace {

void require_same_geometry(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (!a.same_geometry(b))
        throw DataError(std::string(op) + ": mask geometry mismatch");
}

} // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
    require_same_geometry(a, b, "mask_and");
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a.get(i) && b.get(i));
    return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
    require_same_geometry(a, b, "mask_or");
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a.get(i) || b.get(i));
    return out;
}

BinaryMask mask_subtract(const BinaryMask& a, const BinaryMask& b) {
    require_same_geometry(a, b, "mask_subtract");
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, a.get(i) && !b.get(i));
    return out;
}

BinaryMask mask_complement(const BinaryMask& a) {
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, !a.get(i));
    return out;
}

GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask) {
    require_same_geometry(img, mask, "apply_mask");
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = mask.get(i) ? img[i] : 0.0;
    return out;
}

} // namespace ctsev
