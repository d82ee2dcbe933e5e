#include "ctsev/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <queue>

#include "ctsev/csv.hpp"
#include "ctsev/errors.hpp"
#include "ctsev/image_io.hpp"
#include "ctsev/imaging.hpp"
#include "ctsev/parallel.hpp"
#include "ctsev/rng.hpp"

namespace ctsev {

namespace {

constexpr double kBackground = 5.0 / 255.0;
constexpr double kBody = 185.0 / 255.0;
constexpr double kLungTissue = 40.0 / 255.0;
constexpr double kGgo = 128.0 / 255.0;
constexpr double kVessel = 210.0 / 255.0;

struct Ellipse {
    double cx, cy, a, b;
    bool contains(int x, int y) const {
        const double dx = (x - cx) / a;
        const double dy = (y - cy) / b;
        return dx * dx + dy * dy <= 1.0;
    }
};

struct SliceGeometry {
    Ellipse body;
    Ellipse lung_left;  // patient left = viewer right
    Ellipse lung_right; // patient right = viewer left
};

SliceGeometry slice_geometry(const PhantomSpec& spec, int z) {
    const double w = spec.width, h = spec.height;
    const double m = (spec.n_slices - 1) / 2.0;
    const double q = spec.n_slices == 1 ? 0.0 : (z - m) / (m + 1.0);
    const double s = std::sqrt(1.0 - 0.85 * q * q);

    SliceGeometry g;
    g.body = {w / 2.0, h / 2.0 + 0.03 * h, 0.42 * w * (0.92 + 0.08 * s),
              0.40 * h * (0.92 + 0.08 * s)};
    g.lung_right = {w / 2.0 - 0.20 * w, h / 2.0, 0.15 * w * s, 0.24 * h * s};
    g.lung_left = {w / 2.0 + 0.20 * w, h / 2.0, 0.15 * w * s, 0.24 * h * s};
    return g;
}

/// Grows exactly `target` pixels inside `allowed` from the given seeds by a
/// flood ordered on jittered euclidean seed distance, producing compact
/// near-circular blobs with a minimal, lightly irregular perimeter.
void grow_region(const BinaryMask& allowed, const std::vector<int>& seeds, long long target,
                 Rng& rng, BinaryMask& out) {
    if (target <= 0) return;
    const int w = allowed.width();
    const auto seed_distance = [&](int px) {
        const double x = px % w, y = px / w;
        double best = 1e300;
        for (int s : seeds) {
            const double dx = x - s % w, dy = y - s / w;
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
        return best;
    };
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    std::vector<std::uint8_t> seen(allowed.size(), 0);
    for (int s : seeds)
        if (!seen[s]) {
            seen[s] = 1;
            frontier.emplace(0.0, s);
        }
    long long n_grown = 0;
    while (n_grown < target && !frontier.empty()) {
        const auto [c, px] = frontier.top();
        frontier.pop();
        out.set(static_cast<std::size_t>(px), true);
        ++n_grown;
        const int x = px % w, y = px / w;
        const int nbs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& nb : nbs) {
            if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= allowed.height()) continue;
            const int npx = nb[1] * w + nb[0];
            if (seen[npx] || !allowed.get(static_cast<std::size_t>(npx))) continue;
            seen[npx] = 1;
            frontier.emplace(seed_distance(npx) + 0.25 * rng.uniform(), npx);
        }
    }
}

void draw_vessels(const BinaryMask& side, const Ellipse& e, double density, Rng& rng,
                  BinaryMask& vessels) {
    const int count = static_cast<int>(std::lround(3.0 * density));
    const int w = side.width();
    for (int v = 0; v < count; ++v) {
        double x = e.cx + rng.uniform(-0.3, 0.3) * e.a;
        double y = e.cy + rng.uniform(-0.3, 0.3) * e.b;
        double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const int steps =
            static_cast<int>(std::lround(rng.uniform(0.6, 1.1) * std::min(e.a, e.b)));
        for (int s = 0; s < steps; ++s) {
            theta += rng.uniform(-0.15, 0.15);
            x += std::cos(theta);
            y += std::sin(theta);
            const int xi = static_cast<int>(std::lround(x));
            const int yi = static_cast<int>(std::lround(y));
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int px = xi + dx, py = yi + dy;
                    if (px < 0 || px >= w || py < 0 || py >= side.height()) continue;
                    if (side.get(px, py)) vessels.set(px, py, true);
                }
        }
    }
}

std::vector<long long> slice_targets(const std::vector<long long>& lung_area,
                                     const std::vector<long long>& capacity, double f,
                                     Rng& rng) {
    const int n = static_cast<int>(lung_area.size());
    long long total_area = 0, total_capacity = 0;
    for (int z = 0; z < n; ++z) {
        total_area += lung_area[z];
        total_capacity += capacity[z];
    }
    const long long total = std::llround(f * static_cast<double>(total_area));
    if (total > total_capacity)
        throw DataError("phantom: infeasible involvement fraction");

    std::vector<double> raw(n);
    double raw_sum = 0.0;
    for (int z = 0; z < n; ++z) {
        raw[z] = f * static_cast<double>(lung_area[z]) * (1.0 + rng.uniform(-0.1, 0.1));
        raw_sum += raw[z];
    }

    std::vector<long long> t(n);
    std::vector<std::pair<double, int>> frac(n);
    long long assigned = 0;
    for (int z = 0; z < n; ++z) {
        const double scaled = raw_sum == 0.0 ? 0.0 : raw[z] * total / raw_sum;
        t[z] = std::min(static_cast<long long>(std::floor(scaled)), capacity[z]);
        assigned += t[z];
        frac[z] = {std::floor(scaled) - scaled, z}; // ascending sort = largest frac first
    }
    std::sort(frac.begin(), frac.end());
    long long deficit = total - assigned;
    while (deficit > 0) {
        bool progress = false;
        for (const auto& [unused, z] : frac) {
            if (deficit == 0) break;
            if (t[z] < capacity[z]) {
                ++t[z];
                --deficit;
                progress = true;
            }
        }
        if (!progress) throw InternalError("phantom: target redistribution stalled");
    }
    return t;
}

} // namespace

void PhantomSpec::validate() const {
    if (severity < 1 || severity > 4) throw DataError("PhantomSpec: severity outside 1..4");
    const auto& band = kClassBands[severity - 1];
    if (!(involvement >= band.lo && involvement <= band.hi))
        throw DataError("PhantomSpec: involvement outside the declared class band");
    if (n_slices < 1) throw DataError("PhantomSpec: n_slices must be >= 1");
    if (width < 64 || height < 64) throw DataError("PhantomSpec: image size must be >= 64");
    if (!(noise_sigma >= 0.0)) throw DataError("PhantomSpec: noise_sigma must be >= 0");
    if (!(vessel_density >= 0.0)) throw DataError("PhantomSpec: vessel_density must be >= 0");
}

PhantomScan generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    const int n = spec.n_slices;
    const int w = spec.width, h = spec.height;

    PhantomScan out;
    out.label = spec.severity;
    out.scan.patient_id = "phantom";
    out.scan.slices.resize(n, GrayImage(w, h));
    out.lung_masks.resize(n, BinaryMask(w, h));
    out.infection_masks.resize(n, BinaryMask(w, h));

    std::vector<BinaryMask> side_left(n, BinaryMask(w, h));
    std::vector<BinaryMask> side_right(n, BinaryMask(w, h));
    std::vector<long long> area(n), area_left(n), area_right(n), capacity(n);
    for (int z = 0; z < n; ++z) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03d.png", z);
        out.scan.slice_names.emplace_back(name);

        const SliceGeometry g = slice_geometry(spec, z);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (g.lung_right.contains(x, y))
                    side_right[z].set(x, y, true);
                else if (g.lung_left.contains(x, y))
                    side_left[z].set(x, y, true);
            }
        area_left[z] = static_cast<long long>(side_left[z].count());
        area_right[z] = static_cast<long long>(side_right[z].count());
        area[z] = area_left[z] + area_right[z];
        capacity[z] = static_cast<long long>(std::floor(0.98 * area_left[z])) +
                      static_cast<long long>(std::floor(0.98 * area_right[z]));
    }

    // Scan-level planting plan: per-slice jittered targets that sum exactly
    // to the rounded involvement total, then a left/right split per slice.
    Rng scan_rng(spec.seed);
    const std::vector<long long> target = slice_targets(area, capacity, spec.involvement,
                                                        scan_rng);
    // Each scan gets a laterality: the fraction of infected pixels planted in
    // the patient-left lung. Real involvement is rarely symmetric, and the
    // asymmetry is what separates learned classifiers from fixed-weight
    // scoring rules downstream.
    const double laterality = scan_rng.uniform(0.25, 0.75);
    std::vector<long long> target_left(n);
    for (int z = 0; z < n; ++z) {
        const long long cap_l = static_cast<long long>(std::floor(0.98 * area_left[z]));
        const long long cap_r = static_cast<long long>(std::floor(0.98 * area_right[z]));
        long long tl =
            std::llround(target[z] * (laterality + scan_rng.uniform(-0.03, 0.03)));
        tl = std::clamp(tl, std::max<long long>(0, target[z] - cap_r),
                        std::min(cap_l, target[z]));
        target_left[z] = tl;
    }

    long long planted_total = 0, area_total = 0;
    for (int z = 0; z < n; ++z) {
        planted_total += target[z];
        area_total += area[z];
    }
    out.planted_fraction =
        area_total == 0 ? 0.0 : static_cast<double>(planted_total) / area_total;

    parallel_for(static_cast<std::size_t>(n), 0, [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        Rng rng(spec.seed, 1 + static_cast<std::uint64_t>(z));
        const SliceGeometry g = slice_geometry(spec, z);
        auto& img = out.scan.slices[z];
        auto& lung = out.lung_masks[z];
        auto& infection = out.infection_masks[z];
        lung = mask_or(side_left[z], side_right[z]);

        BinaryMask vessels(w, h);
        draw_vessels(side_right[z], g.lung_right, spec.vessel_density, rng, vessels);
        draw_vessels(side_left[z], g.lung_left, spec.vessel_density, rng, vessels);

        const auto pick_seeds = [&](const BinaryMask& side, long long t) {
            std::vector<int> pixels;
            pixels.reserve(side.count());
            for (std::size_t i = 0; i < side.size(); ++i)
                if (side.get(i)) pixels.push_back(static_cast<int>(i));
            int n_seeds = 1;
            if (t > 400)
                n_seeds += static_cast<int>(rng.below(3));
            else if (t > 120)
                n_seeds += static_cast<int>(rng.below(2));
            std::vector<int> seeds;
            for (int s = 0; s < n_seeds && !pixels.empty(); ++s)
                seeds.push_back(pixels[rng.below(pixels.size())]);
            return seeds;
        };
        if (target_left[z] > 0)
            grow_region(side_left[z], pick_seeds(side_left[z], target_left[z]),
                        target_left[z], rng, infection);
        const long long t_right = target[z] - target_left[z];
        if (t_right > 0)
            grow_region(side_right[z], pick_seeds(side_right[z], t_right), t_right, rng,
                        infection);

        // Lesions render like consolidation: the blob paints over any vessel
        // running through it, so the planted mask equals the visible GGO.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = kBackground;
                if (lung.get(x, y)) {
                    if (infection.get(x, y))
                        v = kGgo;
                    else
                        v = vessels.get(x, y) ? kVessel : kLungTissue;
                } else if (g.body.contains(x, y)) {
                    v = kBody;
                }
                img.at(x, y) = v;
            }

        Rng noise_rng(spec.seed, 100001 + static_cast<std::uint64_t>(z));
        for (std::size_t i = 0; i < img.size(); ++i) {
            const double v = std::clamp(img[i] + spec.noise_sigma * noise_rng.normal(), 0.0, 1.0);
            img[i] = std::round(v * 255.0) / 255.0; // match the 8-bit file exactly
        }
    });
    return out;
}

std::vector<CorpusEntry> generate_corpus(const std::filesystem::path& out_dir, int per_class,
                                         std::uint64_t seed, const PhantomSpec& base,
                                         int threads) {
    if (per_class < 1) throw DataError("generate_corpus: per_class must be >= 1");

    Rng master(seed);
    std::vector<CorpusEntry> entries;
    for (int cls = 1; cls <= 4; ++cls) {
        const auto& band = kClassBands[cls - 1];
        for (int i = 0; i < per_class; ++i) {
            CorpusEntry e;
            char id[16];
            std::snprintf(id, sizeof(id), "scan_%03d", static_cast<int>(entries.size()));
            e.id = id;
            e.label = cls;
            e.involvement = master.uniform(band.lo, band.hi);
            e.seed = master.next();
            entries.push_back(std::move(e));
        }
    }

    std::filesystem::create_directories(out_dir / "scans");
    std::filesystem::create_directories(out_dir / "lung_masks");
    std::filesystem::create_directories(out_dir / "infection_masks");
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        const auto& e = entries[i];
        PhantomSpec spec = base;
        spec.severity = e.label;
        spec.involvement = e.involvement;
        spec.seed = e.seed;
        const PhantomScan scan = generate_phantom(spec);
        const auto scan_dir = out_dir / "scans" / e.id;
        const auto lung_dir = out_dir / "lung_masks" / e.id;
        const auto inf_dir = out_dir / "infection_masks" / e.id;
        std::filesystem::create_directories(scan_dir);
        std::filesystem::create_directories(lung_dir);
        std::filesystem::create_directories(inf_dir);
        for (int z = 0; z < spec.n_slices; ++z) {
            const auto& name = scan.scan.slice_names[z];
            save_gray_png(scan.scan.slices[z], scan_dir / name);
            save_mask_png(scan.lung_masks[z], lung_dir / name);
            save_mask_png(scan.infection_masks[z], inf_dir / name);
        }
    });

    std::string manifest = "id,label,involvement,seed\n";
    for (const auto& e : entries)
        manifest += e.id + "," + std::to_string(e.label) + "," + format_double(e.involvement) +
                    "," + std::to_string(e.seed) + "\n";
    write_text_file(out_dir / "manifest.csv", manifest);
    return entries;
}

std::vector<CorpusEntry> read_manifest(const std::filesystem::path& manifest_path) {
    const auto rows = read_csv(manifest_path);
    if (rows.size() < 2 || rows.front() != std::vector<std::string>{"id", "label",
                                                                    "involvement", "seed"})
        throw DataError("bad manifest: " + manifest_path.string());
    std::vector<CorpusEntry> entries;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != 4) throw DataError("bad manifest row in " + manifest_path.string());
        CorpusEntry e;
        e.id = cells[0];
        e.label = parse_int(cells[1], manifest_path.string());
        if (e.label < 1 || e.label > 4)
            throw DataError("bad manifest label in " + manifest_path.string());
        e.involvement = parse_double(cells[2], manifest_path.string());
        try {
            e.seed = std::stoull(cells[3]);
        } catch (const std::exception&) {
            throw DataError("bad manifest seed in " + manifest_path.string());
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

} // namespace ctsev
