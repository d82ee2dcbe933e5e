#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ctsev/errors.hpp"
#include "ctsev/imaging.hpp"
#include "ctsev/rng.hpp"

using namespace ctsev;

namespace {

GrayImage random_image(int w, int h, Rng& rng) {
    GrayImage img(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.uniform();
    return img;
}

BinaryMask random_mask(int w, int h, Rng& rng, double p = 0.5) {
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) m.set(i, rng.uniform() < p);
    return m;
}

BinaryMask mask_from(int w, int h, const std::vector<int>& rows) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, (rows[static_cast<std::size_t>(y)] >> x) & 1);
    return m;
}

// Naive double-loop morphology oracles: out-of-bounds is false.
BinaryMask naive_dilate(const BinaryMask& m, int kw, int kh) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool any = false;
            for (int dy = -kh / 2; dy <= kh / 2; ++dy)
                for (int dx = -kw / 2; dx <= kw / 2; ++dx)
                    any = any || m.get_or_false(x + dx, y + dy);
            out.set(x, y, any);
        }
    return out;
}

BinaryMask naive_erode(const BinaryMask& m, int kw, int kh) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (int dy = -kh / 2; dy <= kh / 2; ++dy)
                for (int dx = -kw / 2; dx <= kw / 2; ++dx)
                    all = all && m.get_or_false(x + dx, y + dy);
            out.set(x, y, all);
        }
    return out;
}

GrayImage naive_gray_dilate(const GrayImage& img, int kw, int kh) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double best = 0.0;
            for (int dy = -kh / 2; dy <= kh / 2; ++dy)
                for (int dx = -kw / 2; dx <= kw / 2; ++dx) {
                    const int xx = std::clamp(x + dx, 0, img.width() - 1);
                    const int yy = std::clamp(y + dy, 0, img.height() - 1);
                    best = std::max(best, img.at(xx, yy));
                }
            out.at(x, y) = best;
        }
    return out;
}

bool same(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.get(i) != b.get(i)) return false;
    return true;
}

// Exhaustive Otsu oracle on raw bin indices (argmax is scale invariant).
int otsu_oracle(const Histogram& hist) {
    const double total = static_cast<double>(
        std::accumulate(hist.begin(), hist.end(), std::uint64_t{0}));
    int best_t = -1;
    double best_var = -1.0;
    for (int t = 0; t < 256; ++t) {
        double w0 = 0, w1 = 0, s0 = 0, s1 = 0;
        for (int b = 0; b < 256; ++b) {
            const double n = static_cast<double>(hist[static_cast<std::size_t>(b)]);
            if (b <= t) {
                w0 += n;
                s0 += n * b;
            } else {
                w1 += n;
                s1 += n * b;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const double d = s0 / w0 - s1 / w1;
        const double var = (w0 / total) * (w1 / total) * d * d;
        if (var > best_var + 1e-12 * std::max(1.0, best_var)) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace

TEST_CASE("hyperbolic response endpoints, monotonicity, frozen values") {
    for (double c : {0.1, 0.5, 1.0, 5.0}) {
        CHECK(std::abs(hyperbolic_response(0.0, c)) <= 1e-9);
        CHECK(std::abs(hyperbolic_response(1.0, c) - 1.0) <= 1e-9);
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double v = hyperbolic_response(i / 100.0, c);
            CHECK(v >= prev);
            prev = v;
        }
    }
    CHECK(hyperbolic_response(0.5, 0.5) == doctest::Approx(0.36602540378443871).epsilon(1e-12));
    CHECK(hyperbolic_response(0.25, 0.5) == doctest::Approx(0.1580370064762463).epsilon(1e-12));
    CHECK(hyperbolic_response(0.5, 1.0) == doctest::Approx(0.41421356237309492).epsilon(1e-12));
    CHECK(hyperbolic_response(0.5, 5.0) == doctest::Approx(0.47722557505166074).epsilon(1e-12));
}

TEST_CASE("histogram cdf matches the counting oracle") {
    GrayImage img(4, 2);
    for (std::size_t i = 0; i < 4; ++i) img[i] = 10.0 / 255.0 + 1e-4;
    for (std::size_t i = 4; i < 8; ++i) img[i] = 200.0 / 255.0 + 1e-4;
    const auto cdf = histogram_cdf(img);
    CHECK(cdf[9] == 0.0);
    CHECK(cdf[10] == doctest::Approx(0.5));
    CHECK(cdf[199] == doctest::Approx(0.5));
    CHECK(cdf[200] == 1.0);
    CHECK(cdf[255] == 1.0);

    GrayImage zeros(3, 3);
    const auto z = histogram_cdf(zeros);
    for (double v : z) CHECK(v == 1.0);
}

TEST_CASE("masked cdf ignores unmasked pixels") {
    GrayImage img(2, 2);
    img[0] = 0.1;
    img[1] = 0.9;
    img[2] = 0.9;
    img[3] = 0.9;
    BinaryMask m(2, 2);
    m.set(0, true);
    const auto cdf = histogram_cdf(img, m);
    CHECK(cdf[intensity_bin(0.1)] == 1.0);
    CHECK(cdf[255] == 1.0);

    const BinaryMask none(2, 2);
    const auto empty_cdf = histogram_cdf(img, none);
    for (double v : empty_cdf) CHECK(v == 0.0);
}

TEST_CASE("hyperbolize maps extreme bins to 0 and 1") {
    Rng rng(11);
    const GrayImage img = random_image(16, 16, rng);
    const GrayImage out = hyperbolize(img, {0.5});
    int lo_bin = 255, hi_bin = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        lo_bin = std::min(lo_bin, intensity_bin(img[i]));
        hi_bin = std::max(hi_bin, intensity_bin(img[i]));
    }
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (intensity_bin(img[i]) == hi_bin) CHECK(out[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out[i] >= 0.0);
        CHECK(out[i] <= 1.0);
    }
    // Monotone in the bin order.
    for (std::size_t i = 0; i < img.size(); ++i)
        for (std::size_t j = 0; j < img.size(); ++j)
            if (intensity_bin(img[i]) < intensity_bin(img[j])) CHECK(out[i] <= out[j]);
    (void)lo_bin;
}

TEST_CASE("masked hyperbolize zeroes unmasked pixels") {
    Rng rng(12);
    const GrayImage img = random_image(8, 8, rng);
    const BinaryMask m = random_mask(8, 8, rng);
    const GrayImage out = hyperbolize(img, m, {0.5});
    for (std::size_t i = 0; i < img.size(); ++i)
        if (!m.get(i)) CHECK(out[i] == 0.0);
}

TEST_CASE("otsu equals the exhaustive oracle on random histograms") {
    Rng rng(21);
    for (int round = 0; round < 300; ++round) {
        Histogram hist{};
        const int occupied = 2 + static_cast<int>(rng.below(30));
        for (int i = 0; i < occupied; ++i)
            hist[rng.below(256)] += 1 + rng.below(1000);
        const auto res = otsu_analyze(hist);
        const int oracle = otsu_oracle(hist);
        if (oracle < 0) {
            CHECK(!res.has_value());
        } else {
            REQUIRE(res.has_value());
            CHECK(res->threshold == oracle);
        }
    }
}

TEST_CASE("otsu pinned examples") {
    Histogram two{};
    two[50] = 500;
    two[200] = 500;
    CHECK(otsu_analyze(two)->threshold == 50);

    Histogram extremes{};
    extremes[0] = 10;
    extremes[255] = 3;
    CHECK(otsu_analyze(extremes)->threshold == 0);

    Histogram constant{};
    constant[77] = 1000;
    CHECK(!otsu_analyze(constant).has_value());

    GrayImage img(2, 1);
    img[0] = 50.4 / 255.0;
    img[1] = 200.4 / 255.0;
    const auto [t, mask] = otsu_threshold(img);
    CHECK(t == 50);
    CHECK(!mask.get(0, 0));
    CHECK(mask.get(1, 0));

    GrayImage flat(3, 3);
    CHECK_THROWS_AS((void)otsu_threshold(flat), DataError);
}

TEST_CASE("binary morphology matches naive oracles") {
    Rng rng(31);
    for (int round = 0; round < 50; ++round) {
        const BinaryMask m = random_mask(32, 32, rng, 0.4);
        CHECK(same(dilate(m), naive_dilate(m, 3, 3)));
        CHECK(same(erode(m), naive_erode(m, 3, 3)));
        CHECK(same(open(m), naive_dilate(naive_erode(m, 3, 3), 3, 3)));
        CHECK(same(close(m), naive_erode(naive_dilate(m, 3, 3), 3, 3)));
        const StructuringElement wide{5, 3};
        CHECK(same(dilate(m, wide), naive_dilate(m, 5, 3)));
        CHECK(same(erode(m, wide), naive_erode(m, 5, 3)));
    }
}

TEST_CASE("morphology algebraic properties") {
    Rng rng(32);
    for (int round = 0; round < 30; ++round) {
        const BinaryMask m = random_mask(24, 24, rng, 0.45);
        const BinaryMask opened = open(m);
        CHECK(same(open(opened), opened)); // idempotent
        const BinaryMask dilated = dilate(m);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.get(i)) CHECK(dilated.get(i));  // extensive
            if (opened.get(i)) CHECK(m.get(i));   // anti-extensive
        }
        // Duality holds with a one-pixel false padding ring.
        BinaryMask padded(m.width() + 2, m.height() + 2);
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x) padded.set(x + 1, y + 1, m.get(x, y));
        CHECK(same(erode(padded), mask_complement(dilate(mask_complement(padded)))));
    }
}

TEST_CASE("single true pixel dilates to a 3x3 block") {
    BinaryMask m(7, 7);
    m.set(3, 3, true);
    const BinaryMask d = dilate(m);
    CHECK(d.count() == 9);
    for (int y = 2; y <= 4; ++y)
        for (int x = 2; x <= 4; ++x) CHECK(d.get(x, y));
}

TEST_CASE("grayscale morphology and top-hat") {
    Rng rng(33);
    const GrayImage img = random_image(20, 20, rng);
    const GrayImage gd = grayscale_dilate(img);
    const GrayImage oracle = naive_gray_dilate(img, 3, 3);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(gd[i] == doctest::Approx(oracle[i]));

    GrayImage flat(9, 9);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 0.42;
    const GrayImage th = top_hat(flat);
    for (std::size_t i = 0; i < th.size(); ++i) CHECK(th[i] == 0.0);

    const GrayImage th2 = top_hat(img);
    for (std::size_t i = 0; i < th2.size(); ++i) CHECK(th2[i] >= 0.0);

    // A thin bright ridge on flat background survives the top-hat.
    GrayImage ridge(11, 11);
    for (std::size_t i = 0; i < ridge.size(); ++i) ridge[i] = 0.2;
    for (int y = 2; y <= 8; ++y) ridge.at(5, y) = 0.9;
    const GrayImage th3 = top_hat(ridge);
    CHECK(th3.at(5, 5) == doctest::Approx(0.7));
    CHECK(th3.at(2, 2) == doctest::Approx(0.0));
}

TEST_CASE("gaussian smoothing basics") {
    GrayImage constant(8, 8);
    for (std::size_t i = 0; i < constant.size(); ++i) constant[i] = 0.5;
    const GrayImage sm = gaussian_smooth(constant, 1.0);
    for (std::size_t i = 0; i < sm.size(); ++i) CHECK(sm[i] == doctest::Approx(0.5).epsilon(1e-12));

    GrayImage impulse(9, 9);
    impulse.at(4, 4) = 1.0;
    const GrayImage resp = gaussian_smooth(impulse, 1.0);
    CHECK(resp.at(4, 4) == doctest::Approx(0.15924112569070245).epsilon(1e-9));
    double sum = 0.0;
    for (std::size_t i = 0; i < resp.size(); ++i) sum += resp[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

    GrayImage one(1, 1);
    one[0] = 0.77;
    CHECK(gaussian_smooth(one, 2.5)[0] == doctest::Approx(0.77));

    CHECK_THROWS(gaussian_smooth(constant, 0.0));
}

TEST_CASE("connected components label areas partition the foreground") {
    // Two L-shaped 8-connected blobs and an isolated pixel.
    const BinaryMask m = mask_from(8, 6, {0b00000110, 0b00000100, 0b00000000, 0b01100000,
                                          0b10000000, 0b00000001});
    const Labeling lab = connected_components(m);
    CHECK(lab.stats.size() == 3);
    std::size_t total = 0;
    for (const auto& s : lab.stats) total += s.area;
    CHECK(total == m.count());
    // Diagonal touch merges under 8-connectivity.
    CHECK(lab.labels[3 * 8 + 5] == lab.labels[4 * 8 + 7]);

    Rng rng(41);
    for (int round = 0; round < 20; ++round) {
        const BinaryMask r = random_mask(32, 32, rng, 0.35);
        const Labeling l = connected_components(r);
        std::size_t area = 0;
        for (const auto& s : l.stats) area += s.area;
        CHECK(area == r.count());
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK((l.labels[i] != 0) == r.get(i));
    }
}

TEST_CASE("area filter keeps exactly the large components") {
    BinaryMask m(10, 10);
    for (int x = 0; x < 5; ++x) m.set(x, 0, true); // area 5
    m.set(9, 9, true);                             // area 1
    const BinaryMask kept = area_filter(m, 2);
    CHECK(kept.count() == 5);
    CHECK(!kept.get(9, 9));
    CHECK(area_filter(m, 1).count() == 6);
    CHECK(area_filter(m, 6).count() == 0);
}

TEST_CASE("fill holes") {
    // Donut: 5x5 ring around a hole.
    BinaryMask ring(7, 7);
    for (int y = 1; y <= 5; ++y)
        for (int x = 1; x <= 5; ++x)
            if (x == 1 || x == 5 || y == 1 || y == 5) ring.set(x, y, true);
    const BinaryMask solid = fill_holes(ring);
    CHECK(solid.count() == 25);

    // C-shape: hole open to the border stays open.
    BinaryMask c(7, 7);
    for (int y = 1; y <= 5; ++y)
        for (int x = 1; x <= 5; ++x)
            if (x == 1 || y == 1 || y == 5) c.set(x, y, true);
    CHECK(same(fill_holes(c), c));

    Rng rng(42);
    for (int round = 0; round < 20; ++round) {
        const BinaryMask m = random_mask(16, 16, rng, 0.5);
        const BinaryMask filled = fill_holes(m);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.get(i)) CHECK(filled.get(i)); // never removes foreground
    }
}

TEST_CASE("intensity band filter is a per-pixel comparison") {
    Rng rng(43);
    const GrayImage img = random_image(16, 16, rng);
    const BinaryMask band = intensity_band_filter(img, 0.1, 0.9);
    for (std::size_t i = 0; i < img.size(); ++i)
        CHECK(band.get(i) == (img[i] >= 0.1 && img[i] <= 0.9));
    CHECK(intensity_band_filter(img, 0.0, 1.0).count() == img.size());
    CHECK_THROWS(intensity_band_filter(img, 0.9, 0.1));
}

TEST_CASE("mask algebra and apply_mask") {
    Rng rng(44);
    const BinaryMask a = random_mask(12, 12, rng);
    const BinaryMask b = random_mask(12, 12, rng);
    const GrayImage img = random_image(12, 12, rng);
    const BinaryMask sub = mask_subtract(a, b);
    const GrayImage masked = apply_mask(img, a);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(mask_and(a, b).get(i) == (a.get(i) && b.get(i)));
        CHECK(mask_or(a, b).get(i) == (a.get(i) || b.get(i)));
        CHECK(sub.get(i) == (a.get(i) && !b.get(i)));
        CHECK(mask_complement(a).get(i) == !a.get(i));
        CHECK(masked[i] == (a.get(i) ? img[i] : 0.0));
    }
}

TEST_CASE("intensity_bin boundaries") {
    CHECK(intensity_bin(0.0) == 0);
    CHECK(intensity_bin(1.0) == 255);
    CHECK(intensity_bin(0.5) == 128);
    CHECK(intensity_bin(127.6 / 255.0) == 128);
    CHECK(intensity_bin(1.0 / 256.0 - 1e-12) == 0);
    CHECK(intensity_bin(1.0 / 256.0 + 1e-12) == 1);
}
