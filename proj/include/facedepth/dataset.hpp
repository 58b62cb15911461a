#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "facedepth/depth_codec.hpp"
#include "facedepth/render.hpp"

namespace facedepth {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kManifestFormat = "facedepth-manifest";

/// One manifest line: files and generation metadata of a single frame.
struct FrameRecord {
  std::int64_t frame_index = 0;
  std::string rgb_path;    // relative to the dataset root
  std::string depth_path;  // relative to the dataset root
  std::string depth_f32_path;  // empty unless the float sidecar is enabled
  double camera_distance = 0.0;
  EulerAngles head_euler;
  /// Authoritative head pose; the Euler angles are informational.
  Mat3 head_rotation = Mat3::Identity();
  Vec3 head_translation = Vec3::Zero();
  Vec3 light_position = Vec3::Zero();
  Vec3 light_direction = Vec3::Zero();
  std::string expression_name;
  std::map<std::string, double> expression_weights;
  std::uint64_t seed = 0;
  Intrinsics intrinsics;
  int width = 0;
  int height = 0;
  std::int64_t valid_pixels = 0;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct ManifestHeader {
  int version = kManifestVersion;
  std::string generator;
  std::uint64_t global_seed = 0;
  DepthEncoding encoding;
  CameraRig camera;
  /// Effective run configuration, echoed verbatim.
  nlohmann::json config = nlohmann::json::object();
};

struct Manifest {
  ManifestHeader header;
  std::vector<FrameRecord> records;
};

nlohmann::json to_json(const FrameRecord& record);
FrameRecord frame_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ManifestHeader& header);
ManifestHeader manifest_header_from_json(const nlohmann::json& j);

std::string frame_stem(std::int64_t frame_index);

/// Writes frames into `rgb/NNNNNN.png`, `depth/NNNNNN.png` and one manifest
/// record per frame. Safe to call `add` from several threads: files are
/// written to a temporary name and renamed, and records are appended by a
/// single writer in frame-index order, so the manifest never lists a frame
/// whose files are missing and does not depend on completion order.
class DatasetWriter {
 public:
  struct Options {
    bool float_sidecar = false;
  };

  DatasetWriter(std::filesystem::path root, ManifestHeader header, Options options);
  DatasetWriter(std::filesystem::path root, ManifestHeader header)
      : DatasetWriter(std::move(root), std::move(header), Options{}) {}

  /// Writes one frame. The record is appended once all lower frame indices
  /// (starting at `first_index`) have been appended or finish() is called.
  FrameRecord add(const FramePacket& frame);

  /// Appends records still waiting behind a missing frame index.
  void finish();

  void set_first_index(std::int64_t first) { next_index_ = first; }
  const std::filesystem::path& root() const { return root_; }
  std::size_t records_written() const;

 private:
  void append_locked(const FrameRecord& record);

  std::filesystem::path root_;
  ManifestHeader header_;
  Options options_;
  mutable std::mutex mutex_;
  std::int64_t next_index_ = 0;
  std::map<std::int64_t, FrameRecord> pending_;
  std::size_t written_ = 0;
};

/// Builds the record for `frame` using the standard relative file names.
FrameRecord make_frame_record(const FramePacket& frame, bool float_sidecar);

/// Writes every frame sequentially and returns what the manifest contains.
Manifest write_dataset(const std::vector<FramePacket>& frames, const std::filesystem::path& root,
                       const ManifestHeader& header);

Manifest read_manifest(const std::filesystem::path& manifest_path);

/// Runs `write` against a temporary sibling of `path`, then renames it onto `path`.
template <typename WriteFn>
void write_atomically(const std::filesystem::path& path, WriteFn&& write) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write(tmp);
  std::filesystem::rename(tmp, path);
}

}  // namespace facedepth
