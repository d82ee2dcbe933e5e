#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ctsev/errors.hpp"

namespace ctsev {

/// 2D intensity raster, row-major, values normalized to [0, 1].
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        validate_geometry(width, height);
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    GrayImage(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        validate_geometry(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("GrayImage: data length does not match width*height");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_geometry(const GrayImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const GrayImage& other) const = default;

private:
    static void validate_geometry(int width, int height) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("GrayImage: width and height must be >= 1");
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// 2D boolean raster with the same geometry as the image it was derived from.
class BinaryMask {
public:
    BinaryMask() = default;

    BinaryMask(int width, int height, bool fill = false)
        : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("BinaryMask: width and height must be >= 1");
        bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    bool get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    bool get(std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

    /// In-bounds test that treats outside pixels as false.
    bool get_or_false(int x, int y) const {
        if (x < 0 || x >= width_ || y < 0 || y >= height_) return false;
        return get(x, y);
    }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    bool same_geometry(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool same_geometry(const GrayImage& img) const {
        return width_ == img.width() && height_ == img.height();
    }

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    bool operator==(const BinaryMask& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Rectangular structuring element with odd dimensions so the anchor is the
/// center pixel.
struct StructuringElement {
    int width = 3;
    int height = 3;

    void validate() const {
        if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
            throw std::invalid_argument("StructuringElement: dimensions must be odd and >= 1");
    }
};

/// Per-component statistics from connected-component labeling.
struct ComponentStats {
    int label = 0;
    std::size_t area = 0;
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    double centroid_x = 0.0, centroid_y = 0.0;
};

/// Histogram bin for a normalized intensity; 256 bins over [0, 1].
inline int intensity_bin(double v) {
    const int b = static_cast<int>(v * 256.0);
    return std::clamp(b, 0, 255);
}

} // namespace ctsev
