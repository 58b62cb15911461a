#pragma once

#include <filesystem>

#include "facedepth/image.hpp"

namespace facedepth {

/// 8-bit RGB, no alpha.
void write_png_rgb8(const std::filesystem::path& path, const RgbImage& image);
/// Accepts any PNG; gray, palette and alpha inputs are converted to 8-bit RGB.
RgbImage read_png_rgb8(const std::filesystem::path& path);

/// 16-bit single-channel grayscale, no alpha.
void write_png_gray16(const std::filesystem::path& path, const Depth16Image& image);
/// Throws FormatError unless the file is exactly 16-bit grayscale.
Depth16Image read_png_gray16(const std::filesystem::path& path);

}  // namespace facedepth
