#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "facedepth/geometry.hpp"
#include "facedepth/mesh.hpp"

namespace facedepth {

/// Physical pinhole camera. The camera frame follows the graphics convention:
/// +x right, +y up, looking down -z. `pose` maps camera to world.
struct CameraRig {
  double focal_length_mm = 60.0;
  double sensor_width_mm = 36.0;
  int width_px = 480;
  int height_px = 640;
  double near_clip_m = 0.01;
  double far_clip_m = 5.0;
  RigidTransform pose;

  /// Sensor height implied by the width and the pixel aspect (square pixels).
  double sensor_height_mm() const { return sensor_width_mm * height_px / width_px; }

  void validate() const;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

Intrinsics intrinsics(const CameraRig& cam);

/// Pixel coordinates (u right, v down) and positive depth along the optical axis.
struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

/// std::nullopt marks a point on or behind the camera plane.
std::optional<Projection> project(const CameraRig& cam, const Vec3& world, const Intrinsics& intr);

/// World point at planar depth `z` seen through pixel (u, v).
Vec3 unproject(const CameraRig& cam, const Intrinsics& intr, double u, double v, double z);

struct PointLight {
  Vec3 position = Vec3(0.2, 0.3, 0.0);
  double intensity = 0.85;
  Vec3 color = Vec3::Ones();

  void validate() const;
};

struct Range {
  double min = 0.0;
  double max = 0.0;

  bool contains(double x) const { return x >= min && x <= max; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Sampling domain for a dataset sweep. Distances are meters, angles degrees.
struct SweepConfig {
  Range distance_m{0.700, 1.000};
  Range yaw_deg{-45.0, 45.0};
  Range pitch_deg{-20.0, 20.0};
  Range roll_deg{-10.0, 10.0};
  /// "neutral" selects no morph; any other name must be a mesh morph.
  std::vector<std::string> expressions{"neutral", "angry", "happy", "sad", "scared"};
  Range expression_weight{1.0, 1.0};
  /// Axis-aligned box the light position is drawn from (world, meters).
  Vec3 light_min = Vec3(0.2, 0.3, 0.0);
  Vec3 light_max = Vec3(0.2, 0.3, 0.0);
  double light_intensity = 0.85;
  Vec3 light_color = Vec3::Ones();

  void validate() const;
};

struct SceneSample {
  double camera_distance = 0.0;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  /// Head model-to-world transform: rotation by the Euler angles, then the
  /// head origin placed `camera_distance` down the optical axis.
  RigidTransform head_pose;
  std::string expression_name;
  ExpressionWeights expression;
  PointLight light;
  std::int64_t frame_index = 0;
  std::uint64_t seed = 0;

  Vec3 head_origin() const { return head_pose.translation; }
};

/// Per-frame stream seed derived from the global seed and the frame index.
std::uint64_t mix_seed(std::uint64_t global_seed, std::int64_t frame_index);

/// Draws one frame's scene from `config`. Pure in (config, frame_index,
/// global_seed); identical across platforms and call orders. The camera is
/// assumed to sit at `cam` pose; the head is placed along its optical axis.
SceneSample sample_scene(const SweepConfig& config, std::int64_t frame_index,
                         std::uint64_t global_seed, const CameraRig& cam = CameraRig{});

/// Unit vector from `head_origin` towards the light.
Vec3 light_direction(const SceneSample& sample, const Vec3& head_origin);

}  // namespace facedepth
