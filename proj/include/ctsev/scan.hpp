#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctsev/image.hpp"

namespace ctsev {

/// A CT scan as an ordered stack of equally sized slices.
struct ScanVolume {
    std::string patient_id;
    std::vector<std::string> slice_names; // source filenames, sorted
    std::vector<GrayImage> slices;

    int n_slices() const { return static_cast<int>(slices.size()); }
};

/// Numeric-aware filename comparison: digit runs compare by value, so
/// "2.png" sorts before "10.png".
bool natural_less(const std::string& a, const std::string& b);

/// Slice image files (.png/.pgm) of a directory in natural order.
std::vector<std::filesystem::path> list_slice_files(const std::filesystem::path& dir);

/// Loads every slice image of a directory; validates uniform geometry.
ScanVolume load_scan(const std::filesystem::path& dir);

} // namespace ctsev
