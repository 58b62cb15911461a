#include "facedepth/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "facedepth/error.hpp"
#include "facedepth/png_io.hpp"
#include "facedepth/version.hpp"

namespace facedepth {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json mat_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Mat3 mat_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec_from(j[r]).transpose();
  return m;
}

}  // namespace

std::string frame_stem(std::int64_t frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06lld", static_cast<long long>(frame_index));
  return buf;
}

json to_json(const FrameRecord& r) {
  json j;
  j["frame"] = r.frame_index;
  j["rgb"] = r.rgb_path;
  j["depth"] = r.depth_path;
  if (!r.depth_f32_path.empty()) j["depth_f32"] = r.depth_f32_path;
  j["camera_distance_m"] = r.camera_distance;
  j["head_pose"] = {{"yaw_deg", r.head_euler.yaw_deg},
                    {"pitch_deg", r.head_euler.pitch_deg},
                    {"roll_deg", r.head_euler.roll_deg},
                    {"rotation", mat_json(r.head_rotation)},
                    {"translation_m", vec_json(r.head_translation)}};
  j["light"] = {{"position_m", vec_json(r.light_position)}, {"direction", vec_json(r.light_direction)}};
  j["expression"] = {{"name", r.expression_name}, {"weights", r.expression_weights}};
  j["seed"] = r.seed;
  j["intrinsics"] = {{"fx", r.intrinsics.fx}, {"fy", r.intrinsics.fy}, {"cx", r.intrinsics.cx},
                     {"cy", r.intrinsics.cy}, {"width", r.width},     {"height", r.height}};
  j["valid_pixels"] = r.valid_pixels;
  return j;
}

FrameRecord frame_record_from_json(const json& j) {
  try {
    FrameRecord r;
    r.frame_index = j.at("frame").get<std::int64_t>();
    r.rgb_path = j.at("rgb").get<std::string>();
    r.depth_path = j.at("depth").get<std::string>();
    r.depth_f32_path = j.value("depth_f32", std::string{});
    r.camera_distance = j.at("camera_distance_m").get<double>();
    const json& pose = j.at("head_pose");
    r.head_euler = {pose.at("yaw_deg").get<double>(), pose.at("pitch_deg").get<double>(),
                    pose.at("roll_deg").get<double>()};
    r.head_rotation = mat_from(pose.at("rotation"));
    r.head_translation = vec_from(pose.at("translation_m"));
    r.light_position = vec_from(j.at("light").at("position_m"));
    r.light_direction = vec_from(j.at("light").at("direction"));
    r.expression_name = j.at("expression").at("name").get<std::string>();
    r.expression_weights = j.at("expression").at("weights").get<std::map<std::string, double>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const json& k = j.at("intrinsics");
    r.intrinsics = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                    k.at("cy").get<double>()};
    r.width = k.at("width").get<int>();
    r.height = k.at("height").get<int>();
    r.valid_pixels = j.at("valid_pixels").get<std::int64_t>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad frame record: ") + e.what());
  }
}

json to_json(const ManifestHeader& h) {
  json j;
  j["format"] = kManifestFormat;
  j["version"] = h.version;
  j["generator"] = h.generator;
  j["seed"] = h.global_seed;
  j["encoding"] = {{"scale", h.encoding.scale}, {"invalid", 0}, {"png", "gray16"}};
  j["camera"] = {{"focal_length_mm", h.camera.focal_length_mm},
                 {"sensor_width_mm", h.camera.sensor_width_mm},
                 {"width_px", h.camera.width_px},
                 {"height_px", h.camera.height_px},
                 {"near_clip_m", h.camera.near_clip_m},
                 {"far_clip_m", h.camera.far_clip_m},
                 {"rotation", mat_json(h.camera.pose.rotation)},
                 {"translation_m", vec_json(h.camera.pose.translation)}};
  j["config"] = h.config;
  return j;
}

ManifestHeader manifest_header_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kManifestFormat) throw ParseError("not a facedepth manifest");
    ManifestHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kManifestVersion) {
      throw ParseError("unsupported manifest version " + std::to_string(h.version));
    }
    h.generator = j.at("generator").get<std::string>();
    h.global_seed = j.at("seed").get<std::uint64_t>();
    h.encoding.scale = j.at("encoding").at("scale").get<double>();
    const json& c = j.at("camera");
    h.camera.focal_length_mm = c.at("focal_length_mm").get<double>();
    h.camera.sensor_width_mm = c.at("sensor_width_mm").get<double>();
    h.camera.width_px = c.at("width_px").get<int>();
    h.camera.height_px = c.at("height_px").get<int>();
    h.camera.near_clip_m = c.at("near_clip_m").get<double>();
    h.camera.far_clip_m = c.at("far_clip_m").get<double>();
    h.camera.pose.rotation = mat_from(c.at("rotation"));
    h.camera.pose.translation = vec_from(c.at("translation_m"));
    h.config = j.value("config", json::object());
    return h;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad manifest header: ") + e.what());
  }
}

FrameRecord make_frame_record(const FramePacket& frame, bool float_sidecar) {
  const SceneSample& s = frame.meta.sample;
  FrameRecord r;
  r.frame_index = s.frame_index;
  const std::string stem = frame_stem(s.frame_index);
  r.rgb_path = "rgb/" + stem + ".png";
  r.depth_path = "depth/" + stem + ".png";
  if (float_sidecar) r.depth_f32_path = "depth/" + stem + ".f32";
  r.camera_distance = s.camera_distance;
  r.head_euler = {s.yaw_deg, s.pitch_deg, s.roll_deg};
  r.head_rotation = s.head_pose.rotation;
  r.head_translation = s.head_pose.translation;
  r.light_position = s.light.position;
  r.light_direction = frame.meta.light_direction;
  r.expression_name = s.expression_name;
  r.expression_weights = s.expression.weights;
  r.seed = s.seed;
  r.intrinsics = frame.meta.intrinsics;
  r.width = frame.depth.width();
  r.height = frame.depth.height();
  r.valid_pixels = static_cast<std::int64_t>(frame.coverage());
  return r;
}

DatasetWriter::DatasetWriter(std::filesystem::path root, ManifestHeader header, Options options)
    : root_(std::move(root)), header_(std::move(header)), options_(options) {
  header_.encoding.validate(header_.camera.far_clip_m);
  if (header_.generator.empty()) header_.generator = std::string("facedepth ") + kVersion;
  std::error_code ec;
  std::filesystem::create_directories(root_ / "rgb", ec);
  if (!ec) std::filesystem::create_directories(root_ / "depth", ec);
  if (ec) throw IoError("cannot create dataset directory '" + root_.string() + "': " + ec.message());
  write_atomically(root_ / kManifestName, [&](const std::filesystem::path& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << "# " << to_json(header_).dump() << '\n';
    if (!out.flush()) throw IoError("cannot write manifest in '" + root_.string() + "'");
  });
}

FrameRecord DatasetWriter::add(const FramePacket& frame) {
  const FrameRecord record = make_frame_record(frame, options_.float_sidecar);
  try {
    const Depth16Image encoded = encode_depth16(frame.depth, header_.encoding);
    write_atomically(root_ / record.rgb_path,
                     [&](const std::filesystem::path& tmp) { write_png_rgb8(tmp, frame.rgb); });
    write_atomically(root_ / record.depth_path,
                     [&](const std::filesystem::path& tmp) { write_png_gray16(tmp, encoded); });
    if (options_.float_sidecar) {
      write_atomically(root_ / record.depth_f32_path,
                       [&](const std::filesystem::path& tmp) { write_depth_f32(tmp, frame.depth); });
    }
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError("frame " + std::to_string(record.frame_index) + ": " + e.what());
  } catch (const Error& e) {
    throw IoError("frame " + std::to_string(record.frame_index) + ": " + e.what());
  }

  std::lock_guard lock(mutex_);
  pending_.emplace(record.frame_index, record);
  while (!pending_.empty() && pending_.begin()->first <= next_index_) {
    auto node = pending_.extract(pending_.begin());
    append_locked(node.mapped());
    next_index_ = node.key() + 1;
  }
  return record;
}

void DatasetWriter::finish() {
  std::lock_guard lock(mutex_);
  for (auto& [index, record] : pending_) {
    append_locked(record);
    next_index_ = index + 1;
  }
  pending_.clear();
}

std::size_t DatasetWriter::records_written() const {
  std::lock_guard lock(mutex_);
  return written_;
}

void DatasetWriter::append_locked(const FrameRecord& record) {
  std::ofstream out(root_ / kManifestName, std::ios::binary | std::ios::app);
  out << to_json(record).dump() << '\n';
  if (!out.flush()) {
    throw IoError("frame " + std::to_string(record.frame_index) + ": cannot append manifest record");
  }
  ++written_;
}

Manifest write_dataset(const std::vector<FramePacket>& frames, const std::filesystem::path& root,
                       const ManifestHeader& header) {
  DatasetWriter writer(root, header);
  if (!frames.empty()) writer.set_first_index(frames.front().meta.sample.frame_index);
  for (const auto& f : frames) writer.add(f);
  writer.finish();
  return read_manifest(root / kManifestName);
}

Manifest read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + manifest_path.string() + "'");
  Manifest m;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      if (line[0] == '#') {
        if (have_header) throw ParseError("duplicate header", line_no);
        m.header = manifest_header_from_json(json::parse(line.substr(1)));
        have_header = true;
      } else {
        if (!have_header) throw ParseError("record before header", line_no);
        m.records.push_back(frame_record_from_json(json::parse(line)));
      }
    } catch (const json::exception& e) {
      throw ParseError(manifest_path.string() + ": " + e.what(), line_no);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(manifest_path.string() + ": " + e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError(manifest_path.string() + ": missing header line");
  return m;
}

}  // namespace facedepth
