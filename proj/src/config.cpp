#include "facedepth/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "facedepth/error.hpp"
#include "facedepth/png_io.hpp"

namespace facedepth {
namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"assets", {"mesh", "morphs", "background", "background_rescale", "texture", "background_color"}},
      {"camera", {"focal_length_mm", "sensor_width_mm", "width_px", "height_px", "near_clip_m", "far_clip_m"}},
      {"sweep",
       {"frame_count", "seed", "distance_mm", "yaw_deg", "pitch_deg", "roll_deg", "expressions",
        "expression_weight", "light_min_mm", "light_max_mm", "light_intensity", "light_color"}},
      {"shading", {"ambient", "albedo"}},
      {"depth", {"scale", "float_sidecar"}},
      {"output", {"dir", "workers"}},
  };
  return keys;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) bad_value(key, s, "a number");
  return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    std::string s = *v;
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }

  void number(const std::string& key, double& out) const {
    if (auto v = raw(key)) out = to_double(key, *v);
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) const {
    if (auto v = raw(key)) out = to_int<Int>(key, *v);
  }

  void boolean(const std::string& key, bool& out) const {
    if (auto v = raw(key)) {
      if (*v == "true" || *v == "1" || *v == "yes") {
        out = true;
      } else if (*v == "false" || *v == "0" || *v == "no") {
        out = false;
      } else {
        bad_value(key, *v, "true or false");
      }
    }
  }

  std::vector<double> numbers(const std::string& key, const std::string& v, std::size_t n) const {
    const auto w = words(v);
    if (w.size() != n) bad_value(key, v, n == 2 ? "two numbers 'min max'" : "three numbers 'x y z'");
    std::vector<double> out;
    for (const auto& s : w) out.push_back(to_double(key, s));
    return out;
  }

  void range(const std::string& key, Range& out, double unit = 1.0) const {
    if (auto v = raw(key)) {
      const auto n = numbers(key, *v, 2);
      out = {n[0] * unit, n[1] * unit};
    }
  }

  void vec3(const std::string& key, Vec3& out, double unit = 1.0) const {
    if (auto v = raw(key)) {
      const auto n = numbers(key, *v, 3);
      out = Vec3(n[0], n[1], n[2]) * unit;
    }
  }

  void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) const {
    if (auto v = raw(key)) {
      std::filesystem::path p = *v;
      out = p.empty() || p.is_absolute() ? p : base / p;
    }
  }

 private:
  const ptree& tree_;
};

void check_keys(const ptree& tree) {
  for (const auto& [section, node] : tree) {
    const auto it = schema().find(section);
    if (node.empty() || it == schema().end()) throw ConfigError("unknown config section '" + section + "'");
    for (const auto& [key, value] : node) {
      if (!it->second.count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
    }
  }
}

RunConfig from_tree(ptree tree, const std::filesystem::path& base_dir, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0 || o.find('.') > eq) {
      throw ConfigError("override '" + o + "' must look like section.key=value");
    }
    tree.put(o.substr(0, eq), o.substr(eq + 1));
  }
  check_keys(tree);

  const Reader r(tree);
  RunConfig c;
  r.path("assets.mesh", c.mesh_path, base_dir);
  r.path("assets.morphs", c.morphs_path, base_dir);
  r.path("assets.background", c.background_path, base_dir);
  r.path("assets.texture", c.texture_path, base_dir);
  r.boolean("assets.background_rescale", c.shading.rescale_background);
  if (auto v = r.raw("assets.background_color")) {
    const auto n = r.numbers("assets.background_color", *v, 3);
    for (double x : n) {
      if (x < 0 || x > 255 || x != std::floor(x)) bad_value("assets.background_color", *v, "three integers in [0,255]");
    }
    c.background_color = {static_cast<std::uint8_t>(n[0]), static_cast<std::uint8_t>(n[1]),
                          static_cast<std::uint8_t>(n[2])};
  }

  r.number("camera.focal_length_mm", c.camera.focal_length_mm);
  r.number("camera.sensor_width_mm", c.camera.sensor_width_mm);
  r.integer("camera.width_px", c.camera.width_px);
  r.integer("camera.height_px", c.camera.height_px);
  r.number("camera.near_clip_m", c.camera.near_clip_m);
  r.number("camera.far_clip_m", c.camera.far_clip_m);

  r.integer("sweep.frame_count", c.frame_count);
  r.integer("sweep.seed", c.seed);
  r.range("sweep.distance_mm", c.sweep.distance_m, 1e-3);
  r.range("sweep.yaw_deg", c.sweep.yaw_deg);
  r.range("sweep.pitch_deg", c.sweep.pitch_deg);
  r.range("sweep.roll_deg", c.sweep.roll_deg);
  if (auto v = r.raw("sweep.expressions")) c.sweep.expressions = words(*v);
  r.range("sweep.expression_weight", c.sweep.expression_weight);
  r.vec3("sweep.light_min_mm", c.sweep.light_min, 1e-3);
  r.vec3("sweep.light_max_mm", c.sweep.light_max, 1e-3);
  r.number("sweep.light_intensity", c.sweep.light_intensity);
  r.vec3("sweep.light_color", c.sweep.light_color);

  r.number("shading.ambient", c.shading.ambient);
  if (auto v = r.raw("shading.albedo")) {
    const auto w = words(*v);
    if (w.size() == 1) {
      c.shading.albedo = Vec3::Constant(to_double("shading.albedo", w[0]));
    } else {
      r.vec3("shading.albedo", c.shading.albedo);
    }
  }

  r.number("depth.scale", c.encoding.scale);
  r.boolean("depth.float_sidecar", c.float_sidecar);

  if (auto v = r.raw("output.dir")) c.output_dir = *v;
  r.integer("output.workers", c.workers);
  return c;
}

template <typename F>
void with_key(const char* key, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (mesh_path.empty()) throw ConfigError("assets.mesh: required");
  if (!std::filesystem::is_regular_file(mesh_path)) {
    throw ConfigError("assets.mesh: file '" + mesh_path.string() + "' does not exist");
  }
  const std::pair<const char*, const std::filesystem::path*> optional_files[] = {
      {"assets.morphs", &morphs_path}, {"assets.background", &background_path}, {"assets.texture", &texture_path}};
  for (const auto& [key, p] : optional_files) {
    if (!p->empty() && !std::filesystem::is_regular_file(*p)) {
      throw ConfigError(std::string(key) + ": file '" + p->string() + "' does not exist");
    }
  }
  with_key("camera", [&] { camera.validate(); });
  with_key("sweep", [&] { sweep.validate(); });
  if (frame_count < 1) throw ConfigError("sweep.frame_count: must be at least 1");
  with_key("shading", [&] { shading.validate(); });
  with_key("depth.scale", [&] { encoding.validate(camera.far_clip_m); });
  if (output_dir.empty()) throw ConfigError("output.dir: required");
  if (workers < 1) throw ConfigError("output.workers: must be at least 1");
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides) {
  ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  return from_tree(std::move(tree), base_dir, overrides);
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path(), overrides);
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  const auto range = [](const Range& r) { return json::array({r.min, r.max}); };
  const auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  json j;
  j["assets"] = {{"mesh", c.mesh_path.string()},
                 {"morphs", c.morphs_path.string()},
                 {"background", c.background_path.string()},
                 {"background_rescale", c.shading.rescale_background},
                 {"texture", c.texture_path.string()},
                 {"background_color", {c.background_color.r, c.background_color.g, c.background_color.b}}};
  j["camera"] = {{"focal_length_mm", c.camera.focal_length_mm}, {"sensor_width_mm", c.camera.sensor_width_mm},
                 {"width_px", c.camera.width_px},               {"height_px", c.camera.height_px},
                 {"near_clip_m", c.camera.near_clip_m},         {"far_clip_m", c.camera.far_clip_m}};
  j["sweep"] = {{"frame_count", c.frame_count},
                {"seed", c.seed},
                {"distance_m", range(c.sweep.distance_m)},
                {"yaw_deg", range(c.sweep.yaw_deg)},
                {"pitch_deg", range(c.sweep.pitch_deg)},
                {"roll_deg", range(c.sweep.roll_deg)},
                {"expressions", c.sweep.expressions},
                {"expression_weight", range(c.sweep.expression_weight)},
                {"light_min_m", vec(c.sweep.light_min)},
                {"light_max_m", vec(c.sweep.light_max)},
                {"light_intensity", c.sweep.light_intensity},
                {"light_color", vec(c.sweep.light_color)}};
  j["shading"] = {{"ambient", c.shading.ambient}, {"albedo", vec(c.shading.albedo)}};
  j["depth"] = {{"scale", c.encoding.scale}, {"float_sidecar", c.float_sidecar}};
  return j;
}

SceneAssets load_assets(const RunConfig& config) {
  SceneAssets a;
  a.mesh = load_obj(config.mesh_path);
  if (!config.morphs_path.empty()) a.mesh = attach_morphs(std::move(a.mesh), config.morphs_path);
  for (const auto& e : config.sweep.expressions) {
    if (e != "neutral" && !a.mesh.morphs.count(e)) {
      throw ConfigError("sweep.expressions: mesh has no morph target '" + e + "'");
    }
  }
  if (!config.background_path.empty()) {
    a.background = read_png_rgb8(config.background_path);
    if (!config.shading.rescale_background &&
        (a.background.width() != config.camera.width_px || a.background.height() != config.camera.height_px)) {
      throw ConfigError("assets.background: image is " + std::to_string(a.background.width()) + "x" +
                        std::to_string(a.background.height()) + ", frames are " +
                        std::to_string(config.camera.width_px) + "x" + std::to_string(config.camera.height_px) +
                        " (set assets.background_rescale = true to resample)");
    }
  } else {
    a.background = RgbImage(config.camera.width_px, config.camera.height_px, config.background_color);
  }
  if (!config.texture_path.empty()) {
    a.texture = std::make_shared<const RgbImage>(read_png_rgb8(config.texture_path));
  }
  return a;
}

}  // namespace facedepth
