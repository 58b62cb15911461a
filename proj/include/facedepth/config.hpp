#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facedepth/depth_codec.hpp"
#include "facedepth/image.hpp"
#include "facedepth/render.hpp"
#include "facedepth/scene.hpp"

namespace facedepth {

/// Everything a generation run needs. Loaded from an INI-style file:
///
///   [assets]  mesh, morphs, background, background_rescale, texture, background_color
///   [camera]  focal_length_mm, sensor_width_mm, width_px, height_px, near_clip_m, far_clip_m
///   [sweep]   frame_count, seed, distance_mm, yaw_deg, pitch_deg, roll_deg,
///             expressions, expression_weight, light_min_mm, light_max_mm,
///             light_intensity, light_color
///   [shading] ambient, albedo
///   [depth]   scale, float_sidecar
///   [output]  dir, workers
///
/// Ranges are written as "min max", vectors as "x y z". Relative asset paths
/// resolve against the config file's directory. See docs/config.md.
struct RunConfig {
  std::filesystem::path mesh_path;
  std::filesystem::path morphs_path;      // optional
  std::filesystem::path background_path;  // optional
  std::filesystem::path texture_path;     // optional
  Rgb8 background_color{40, 40, 48};

  CameraRig camera;
  SweepConfig sweep;
  std::int64_t frame_count = 100;
  std::uint64_t seed = 42;
  RenderOptions shading;
  DepthEncoding encoding;
  bool float_sidecar = false;

  std::filesystem::path output_dir = "out";
  int workers = 1;

  /// Checks every invariant and that referenced input files exist.
  /// Throws ConfigError with the offending `section.key` in the message.
  void validate() const;
};

/// `overrides` are "section.key=value" strings applied on top of the file.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Same as load_run_config but from INI text; relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});

/// Effective configuration for the manifest header. Output location and
/// worker count are left out since they do not affect the generated data.
nlohmann::json to_json(const RunConfig& config);

/// Mesh with morphs, background and texture as referenced by a validated config.
struct SceneAssets {
  TriMesh mesh;
  RgbImage background;
  std::shared_ptr<const RgbImage> texture;
};

/// Loads and cross-checks the assets: every configured expression other than
/// "neutral" must exist as a morph target.
SceneAssets load_assets(const RunConfig& config);

}  // namespace facedepth
