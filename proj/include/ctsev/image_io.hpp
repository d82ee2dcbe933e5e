#pragma once

#include <filesystem>

#include "ctsev/image.hpp"

namespace ctsev {

/// Loads an 8-bit single-channel PNG or PGM (P5) as intensities in [0, 1].
/// The format is chosen by file extension (.png, .pgm). Throws DataError on
/// undecodable, unsupported, or truncated files.
GrayImage load_gray_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG; intensities are rounded to 0..255.
void save_gray_png(const GrayImage& img, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PGM (P5).
void save_gray_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Loads a mask from an 8-bit grayscale image file; nonzero pixels are true.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes a mask as an 8-bit PNG with values 0/255.
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

} // namespace ctsev
