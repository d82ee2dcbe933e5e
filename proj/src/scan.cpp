#include "ctsev/scan.hpp"

#include <algorithm>
#include <cctype>
#include <string_view>

#include "ctsev/errors.hpp"
#include "ctsev/image_io.hpp"

namespace ctsev {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view strip_leading_zeros(std::string_view digits) {
    std::size_t i = 0;
    while (i + 1 < digits.size() && digits[i] == '0') ++i;
    return digits.substr(i);
}

bool slice_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".pgm";
}

} // namespace

bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            const std::size_t i0 = i, j0 = j;
            while (i < a.size() && is_digit(a[i])) ++i;
            while (j < b.size() && is_digit(b[j])) ++j;
            const std::string_view da(a.data() + i0, i - i0);
            const std::string_view db(b.data() + j0, j - j0);
            const std::string_view sa = strip_leading_zeros(da);
            const std::string_view sb = strip_leading_zeros(db);
            if (sa.size() != sb.size()) return sa.size() < sb.size();
            if (sa != sb) return sa < sb;
            if (da.size() != db.size()) return da.size() < db.size();
        } else {
            if (a[i] != b[j])
                return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
            ++i;
            ++j;
        }
    }
    return i >= a.size() && j < b.size();
}

std::vector<std::filesystem::path> list_slice_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw DataError("scan directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && slice_extension(entry.path()))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const auto& x, const auto& y) {
        return natural_less(x.filename().string(), y.filename().string());
    });
    return files;
}

ScanVolume load_scan(const std::filesystem::path& dir) {
    const auto files = list_slice_files(dir);
    if (files.empty())
        throw DataError("no slice images found in " + dir.string());

    ScanVolume scan;
    scan.patient_id = dir.filename().string();
    if (scan.patient_id.empty()) // trailing slash
        scan.patient_id = dir.parent_path().filename().string();
    scan.slice_names.reserve(files.size());
    scan.slices.reserve(files.size());
    for (const auto& file : files) {
        scan.slice_names.push_back(file.filename().string());
        scan.slices.push_back(load_gray_image(file));
        if (!scan.slices.back().same_geometry(scan.slices.front()))
            throw DataError("mixed slice geometries in " + dir.string() + " at " +
                            file.filename().string());
    }
    return scan;
}

} // namespace ctsev
