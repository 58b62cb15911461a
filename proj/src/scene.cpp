#include "facedepth/scene.hpp"

#include <cmath>
#include <random>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max)) {
    throw ConfigError(std::string(name) + " range is not finite");
  }
  if (r.min > r.max) throw ConfigError(std::string(name) + " range is inverted");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; the conversion to [0, 1) is
// done here because std::uniform_real_distribution is implementation-defined.
class FrameStream {
 public:
  explicit FrameStream(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(const Range& r) {
    if (r.min == r.max) {
      engine_.discard(1);
      return r.min;
    }
    const double x = r.min + (r.max - r.min) * unit();
    return std::min(x, r.max);
  }

  std::size_t index(std::size_t n) {
    return std::min(static_cast<std::size_t>(unit() * static_cast<double>(n)), n - 1);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

void CameraRig::validate() const {
  if (!(focal_length_mm > 0.0) || !std::isfinite(focal_length_mm)) {
    throw ConfigError("focal length must be positive");
  }
  if (!(sensor_width_mm > 0.0) || !std::isfinite(sensor_width_mm)) {
    throw ConfigError("sensor width must be positive");
  }
  if (width_px < 1 || height_px < 1) throw ConfigError("image dimensions must be at least 1");
  if (!(near_clip_m > 0.0) || !(near_clip_m < far_clip_m) || !std::isfinite(far_clip_m)) {
    throw ConfigError("clip planes must satisfy 0 < near < far");
  }
  pose.validate();
}

Intrinsics intrinsics(const CameraRig& cam) {
  cam.validate();
  const double fx = cam.width_px * cam.focal_length_mm / cam.sensor_width_mm;
  return {fx, fx, cam.width_px / 2.0, cam.height_px / 2.0};
}

std::optional<Projection> project(const CameraRig& cam, const Vec3& world, const Intrinsics& intr) {
  const Vec3 pc = cam.pose.rotation.transpose() * (world - cam.pose.translation);
  const double z = -pc.z();
  if (!(z > 0.0)) return std::nullopt;
  return Projection{intr.cx + intr.fx * pc.x() / z, intr.cy - intr.fy * pc.y() / z, z};
}

Vec3 unproject(const CameraRig& cam, const Intrinsics& intr, double u, double v, double z) {
  const Vec3 pc((u - intr.cx) * z / intr.fx, -(v - intr.cy) * z / intr.fy, -z);
  return cam.pose.apply(pc);
}

void PointLight::validate() const {
  if (!position.allFinite()) throw ConfigError("light position is not finite");
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw ConfigError("light intensity must be >= 0");
  for (int i = 0; i < 3; ++i) {
    if (!(color[i] >= 0.0 && color[i] <= 1.0)) throw ConfigError("light color must lie in [0,1]");
  }
}

void SweepConfig::validate() const {
  check_range(distance_m, "distance");
  if (!(distance_m.min > 0.0)) throw ConfigError("distance range must be positive");
  check_range(yaw_deg, "yaw");
  check_range(pitch_deg, "pitch");
  check_range(roll_deg, "roll");
  check_range(expression_weight, "expression weight");
  if (expression_weight.min < 0.0 || expression_weight.max > 1.0) {
    throw ConfigError("expression weight range must lie in [0,1]");
  }
  if (expressions.empty()) throw ConfigError("expression set is empty");
  for (int i = 0; i < 3; ++i) {
    check_range({light_min[i], light_max[i]}, "light box");
  }
  PointLight{light_min, light_intensity, light_color}.validate();
}

std::uint64_t mix_seed(std::uint64_t global_seed, std::int64_t frame_index) {
  return splitmix64(splitmix64(global_seed) ^ static_cast<std::uint64_t>(frame_index));
}

SceneSample sample_scene(const SweepConfig& config, std::int64_t frame_index,
                         std::uint64_t global_seed, const CameraRig& cam) {
  config.validate();
  if (frame_index < 0) throw ConfigError("frame index must be non-negative");

  SceneSample s;
  s.frame_index = frame_index;
  s.seed = mix_seed(global_seed, frame_index);
  FrameStream rng(s.seed);

  s.camera_distance = rng.uniform(config.distance_m);
  s.yaw_deg = rng.uniform(config.yaw_deg);
  s.pitch_deg = rng.uniform(config.pitch_deg);
  s.roll_deg = rng.uniform(config.roll_deg);
  s.expression_name = config.expressions[rng.index(config.expressions.size())];
  const double weight = rng.uniform(config.expression_weight);
  if (s.expression_name != "neutral") s.expression.weights[s.expression_name] = weight;

  Vec3 light_pos;
  for (int i = 0; i < 3; ++i) light_pos[i] = rng.uniform({config.light_min[i], config.light_max[i]});
  s.light = PointLight{light_pos, config.light_intensity, config.light_color};

  const RigidTransform local =
      RigidTransform::from_euler_deg(s.yaw_deg, s.pitch_deg, s.roll_deg,
                                     Vec3(0.0, 0.0, -s.camera_distance));
  s.head_pose = cam.pose * local;
  return s;
}

Vec3 light_direction(const SceneSample& sample, const Vec3& head_origin) {
  const Vec3 d = sample.light.position - head_origin;
  const double len = d.norm();
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw GeometryError("light coincides with the head origin");
  }
  return d / len;
}

}  // namespace facedepth
