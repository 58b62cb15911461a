#include "facedepth/depth_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

constexpr char kF32Magic[4] = {'F', 'D', 'D', '1'};

static_assert(std::endian::native == std::endian::little,
              "float sidecar I/O assumes a little-endian host");

}  // namespace

void DepthEncoding::validate(double far_clip_m) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("depth scale must be positive");
  if (scale * far_clip_m > 65535.0) {
    throw ConfigError("depth scale " + std::to_string(scale) + " overflows 16 bits at far clip " +
                      std::to_string(far_clip_m) + " m");
  }
}

Depth16Image encode_depth16(const DepthMap& depth, const DepthEncoding& enc) {
  if (!(enc.scale > 0.0)) throw ConfigError("depth scale must be positive");
  Depth16Image out(depth.width(), depth.height(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth.at(x, y);
      if (d == kInvalidDepth) continue;
      if (!std::isfinite(d) || d < 0.0) {
        throw EncodingError("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                            ") has non-encodable depth " + std::to_string(d));
      }
      const double units = std::round(d * enc.scale);
      if (units > 65535.0) {
        throw EncodingError("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") depth " +
                            std::to_string(d) + " m overflows 16 bits at scale " +
                            std::to_string(enc.scale));
      }
      out.at(x, y) = static_cast<std::uint16_t>(std::max(units, 1.0));
    }
  }
  return out;
}

DepthMap decode_depth16(const Depth16Image& image, const DepthEncoding& enc) {
  if (!(enc.scale > 0.0)) throw ConfigError("depth scale must be positive");
  DepthMap out(image.width(), image.height(), kInvalidDepth);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (image[i] != 0) out[i] = image[i] / enc.scale;
  }
  return out;
}

void write_depth_f32(const std::filesystem::path& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kF32Magic, 4);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(depth.width()),
                                 static_cast<std::uint32_t>(depth.height())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  std::vector<float> row(static_cast<std::size_t>(depth.width()));
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) row[x] = static_cast<float>(depth.at(x, y));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write to " + path.string());
}

DepthMap read_depth_f32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  std::uint32_t dims[2] = {};
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || std::memcmp(magic, kF32Magic, 4) != 0) {
    throw FormatError(path.string() + " is not a float depth sidecar");
  }
  if (dims[0] > 1u << 15 || dims[1] > 1u << 15) throw FormatError(path.string() + ": implausible dimensions");
  DepthMap out(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
  std::vector<float> buf(out.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw FormatError(path.string() + ": truncated float depth sidecar");
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i];
  return out;
}

}  // namespace facedepth
