#pragma once

#include <filesystem>

#include "facedepth/image.hpp"

namespace facedepth {

/// Fixed-point depth encoding for 16-bit storage. 0 is the invalid sentinel.
struct DepthEncoding {
  /// Stored units per meter; the default stores 0.1 mm steps.
  double scale = 10000.0;

  /// Throws ConfigError unless scale > 0 and scale * far_clip <= 65535.
  void validate(double far_clip_m) const;
};

/// Valid pixels map to round(depth * scale), never below 1; invalid pixels to 0.
/// Throws EncodingError naming the first pixel whose value exceeds 65535.
Depth16Image encode_depth16(const DepthMap& depth, const DepthEncoding& enc);

/// 0 decodes to invalid, v > 0 to v / scale meters.
DepthMap decode_depth16(const Depth16Image& image, const DepthEncoding& enc);

/// Raw float32 depth sidecar: "FDD1" magic, u32 width, u32 height (little
/// endian), then row-major float32 meters with 0 for invalid.
void write_depth_f32(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_f32(const std::filesystem::path& path);

}  // namespace facedepth
