#pragma once

#include <memory>

#include "facedepth/image.hpp"
#include "facedepth/mesh.hpp"
#include "facedepth/scene.hpp"

namespace facedepth {

struct RenderOptions {
  double ambient = 0.15;
  /// Used when the mesh has neither per-vertex colors nor a bound texture.
  Vec3 albedo = Vec3::Constant(0.75);
  /// Sampled bilinearly through the mesh's texture coordinates when both exist.
  std::shared_ptr<const RgbImage> texture;
  /// Rescale a background of different size by nearest neighbor instead of failing.
  bool rescale_background = false;

  void validate() const;
};

struct FrameMeta {
  SceneSample sample;
  Vec3 light_direction = Vec3::Zero();
  Intrinsics intrinsics;
};

/// One rendered sample. `mask` is 1 exactly where `depth` is valid.
struct FramePacket {
  RgbImage rgb;
  DepthMap depth;
  Mask mask;
  FrameMeta meta;

  std::size_t coverage() const;
};

/// Rasterizes a world-space mesh through `cam`.
///
/// Coverage is tested at pixel centers with the top-left fill rule on a
/// 1/256-pixel fixed-point grid. Depth is planar z (distance along the optical
/// axis), interpolated perspective-correctly; the depth test keeps strictly
/// nearer fragments, so the earlier triangle wins ties. Triangles are clipped
/// against the near plane; fragments beyond the far plane are discarded.
/// Shading per channel: albedo * (ambient + I * color * max(0, n.l) / d^2),
/// clamped to [0, 1]. Uncovered pixels are black with invalid depth.
FramePacket rasterize(const TriMesh& mesh, const CameraRig& cam, const PointLight& light,
                      const RenderOptions& options = {});

/// Replaces uncovered pixels with the background. Throws ConfigError on a size
/// mismatch unless `rescale` is set, in which case the background is first
/// resampled by nearest neighbor.
FramePacket composite_background(FramePacket frame, const RgbImage& background, bool rescale = false);

RgbImage rescale_nearest(const RgbImage& image, int width, int height);

/// Expression, head pose, rasterization and compositing for one sample.
FramePacket render_frame(const TriMesh& mesh, const SceneSample& sample, const CameraRig& cam,
                         const RgbImage& background, const RenderOptions& options = {});

/// Gray-level depth visualization: the nearest valid pixel is white, the
/// farthest dark gray (32), invalid pixels black. Monotone in depth.
RgbImage colorize_depth(const DepthMap& depth);

}  // namespace facedepth
