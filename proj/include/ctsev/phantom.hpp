#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctsev/image.hpp"
#include "ctsev/scan.hpp"

namespace ctsev {

/// Severity bands for sampling and validating involvement fractions. The
/// mild band starts at 0.03 so every scan carries at least one lesion large
/// enough to survive the extraction area filters; the critical band is
/// capped at 0.96 so planted infection always fits inside the lung with
/// room for the healthy margin.
struct InvolvementBand {
    double lo, hi;
};
constexpr std::array<InvolvementBand, 4> kClassBands{
    {{0.03, 0.249}, {0.25, 0.499}, {0.50, 0.749}, {0.75, 0.96}}};

struct PhantomSpec {
    int severity = 1;
    double involvement = 0.10; // target infected fraction of lung pixels
    int n_slices = 21;
    int width = 160;
    int height = 160;
    double vessel_density = 1.0;
    double noise_sigma = 0.0005;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PhantomScan {
    ScanVolume scan;
    std::vector<BinaryMask> lung_masks;
    std::vector<BinaryMask> infection_masks;
    int label = 1;
    double planted_fraction = 0.0; // measured over all slices
};

/// Renders a deterministic synthetic scan: bright body ellipse, two dark
/// lungs shrinking toward apex and base, thin bright vessels, and mid-gray
/// infection blobs planted to hit the involvement fraction exactly (up to
/// rounding) at scan level with ~+-10% relative per-slice variation.
PhantomScan generate_phantom(const PhantomSpec& spec);

struct CorpusEntry {
    std::string id;
    int label = 1;
    double involvement = 0.0;
    std::uint64_t seed = 0;
};

/// Writes per_class scans per severity class under out_dir:
/// scans/<id>/NNN.png, lung_masks/<id>/NNN.png, infection_masks/<id>/NNN.png
/// and manifest.csv (id,label,involvement,seed). Involvements are sampled
/// uniformly inside each class band.
std::vector<CorpusEntry> generate_corpus(const std::filesystem::path& out_dir, int per_class,
                                         std::uint64_t seed, const PhantomSpec& base,
                                         int threads = 0);

std::vector<CorpusEntry> read_manifest(const std::filesystem::path& manifest_path);

} // namespace ctsev
