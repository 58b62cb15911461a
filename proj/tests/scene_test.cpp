#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "facedepth/error.hpp"
#include "facedepth/scene.hpp"

namespace fd = facedepth;
using fd::Vec3;

TEST(Intrinsics, DefaultRig) {
  const auto k = fd::intrinsics(fd::CameraRig{});
  EXPECT_EQ(k.fx, 800.0);
  EXPECT_EQ(k.fy, 800.0);
  EXPECT_EQ(k.cx, 240.0);
  EXPECT_EQ(k.cy, 320.0);
}

TEST(Intrinsics, FocalEqualsSensorWidth) {
  fd::CameraRig cam;
  cam.focal_length_mm = 36;
  cam.width_px = cam.height_px = 100;
  EXPECT_EQ(fd::intrinsics(cam).fx, 100.0);
}

TEST(Intrinsics, DoublingWidthDoublesFocal) {
  fd::CameraRig a, b;
  b.width_px = 2 * a.width_px;
  EXPECT_EQ(fd::intrinsics(b).fx, 2.0 * fd::intrinsics(a).fx);
}

TEST(CameraRig, ValidateRejectsBadValues) {
  auto bad = [](auto mutate) {
    fd::CameraRig c;
    mutate(c);
    return c;
  };
  EXPECT_NO_THROW(fd::CameraRig{}.validate());
  EXPECT_THROW(bad([](auto& c) { c.near_clip_m = 0; }).validate(), fd::ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.far_clip_m = 0.005; }).validate(), fd::ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.focal_length_mm = -1; }).validate(), fd::ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.sensor_width_mm = 0; }).validate(), fd::ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.width_px = 0; }).validate(), fd::ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.focal_length_mm = NAN; }).validate(), fd::ConfigError);
}

TEST(Project, OnAxisPointHitsPrincipalPoint) {
  const fd::CameraRig cam;
  const auto p = fd::project(cam, Vec3(0, 0, -0.85), fd::intrinsics(cam));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->u, 240.0);
  EXPECT_EQ(p->v, 320.0);
  EXPECT_EQ(p->z, 0.85);
}

TEST(Project, OffsetPoint) {
  const fd::CameraRig cam;
  const auto p = fd::project(cam, Vec3(0.085, 0, -0.85), fd::intrinsics(cam));
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->u, 320.0, 1e-12);
  EXPECT_EQ(p->v, 320.0);
}

TEST(Project, ImageRowsGrowDownwards) {
  const fd::CameraRig cam;
  const auto up = fd::project(cam, Vec3(0, 0.1, -1), fd::intrinsics(cam));
  ASSERT_TRUE(up);
  EXPECT_LT(up->v, 320.0);
}

TEST(Project, CameraOriginAndBehindAreMarked) {
  const fd::CameraRig cam;
  EXPECT_FALSE(fd::project(cam, Vec3(0, 0, 0), fd::intrinsics(cam)));
  EXPECT_FALSE(fd::project(cam, Vec3(0.1, 0.2, 0.5), fd::intrinsics(cam)));
}

TEST(Project, ScaleConsistentIntrinsics) {
  fd::CameraRig a, b;
  b.focal_length_mm *= 2;
  b.sensor_width_mm *= 2;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5), z(0.02, 4.9);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(u(rng), u(rng), -z(rng));
    const auto pa = fd::project(a, p, fd::intrinsics(a));
    const auto pb = fd::project(b, p, fd::intrinsics(b));
    ASSERT_EQ(pa->u, pb->u);
    ASSERT_EQ(pa->v, pb->v);
  }
}

TEST(Project, UnprojectRoundTrip) {
  fd::CameraRig cam;
  cam.pose = fd::RigidTransform::from_euler_deg(10, -5, 3, Vec3(0.1, -0.2, 0.3));
  const auto k = fd::intrinsics(cam);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uu(0, 480), vv(0, 640), zz(0.0101, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const double u = uu(rng), v = vv(rng), z = zz(rng);
    const auto p = fd::project(cam, fd::unproject(cam, k, u, v, z), k);
    ASSERT_TRUE(p);
    ASSERT_NEAR(p->u, u, 1e-6);
    ASSERT_NEAR(p->v, v, 1e-6);
    ASSERT_NEAR(p->z, z, 1e-6);
  }
}

TEST(SampleScene, DistanceAndAnglesStayInRange) {
  const fd::SweepConfig cfg;
  for (std::int64_t i = 0; i < 10000; ++i) {
    const auto s = fd::sample_scene(cfg, i, 42);
    ASSERT_TRUE(cfg.distance_m.contains(s.camera_distance));
    ASSERT_TRUE(cfg.yaw_deg.contains(s.yaw_deg));
    ASSERT_TRUE(cfg.pitch_deg.contains(s.pitch_deg));
    ASSERT_TRUE(cfg.roll_deg.contains(s.roll_deg));
    ASSERT_EQ(s.frame_index, i);
  }
}

TEST(SampleScene, DeterministicAndBitIdentical) {
  const fd::SweepConfig cfg;
  const auto a = fd::sample_scene(cfg, 17, 42);
  const auto b = fd::sample_scene(cfg, 17, 42);
  EXPECT_EQ(a.camera_distance, b.camera_distance);
  EXPECT_EQ(a.head_pose.rotation, b.head_pose.rotation);
  EXPECT_EQ(a.head_pose.translation, b.head_pose.translation);
  EXPECT_EQ(a.expression, b.expression);
  EXPECT_EQ(a.light.position, b.light.position);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_NE(fd::sample_scene(cfg, 17, 43).camera_distance, a.camera_distance);
}

TEST(SampleScene, OrderIndependent) {
  const fd::SweepConfig cfg;
  std::vector<std::int64_t> idx(200);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> sequential;
  for (auto i : idx) sequential.push_back(fd::sample_scene(cfg, i, 9).camera_distance);
  std::shuffle(idx.begin(), idx.end(), std::mt19937(4));
  for (auto i : idx) ASSERT_EQ(fd::sample_scene(cfg, i, 9).camera_distance, sequential[static_cast<std::size_t>(i)]);
}

TEST(SampleScene, DistanceMeanNearMidpoint) {
  const fd::SweepConfig cfg;
  double sum = 0;
  for (std::int64_t i = 0; i < 10000; ++i) sum += fd::sample_scene(cfg, i, 42).camera_distance;
  const double mean = sum / 10000;
  EXPECT_GE(mean, 0.82);
  EXPECT_LE(mean, 0.88);
}

TEST(SampleScene, HeadSitsOnOpticalAxis) {
  const fd::SweepConfig cfg;
  for (std::int64_t i = 0; i < 100; ++i) {
    const auto s = fd::sample_scene(cfg, i, 1);
    EXPECT_EQ(s.head_origin(), Vec3(0, 0, -s.camera_distance));
    const auto e = fd::RigidTransform::from_euler_deg(s.yaw_deg, s.pitch_deg, s.roll_deg);
    EXPECT_LE((e.rotation - s.head_pose.rotation).norm(), 1e-15);
  }
}

TEST(SampleScene, ExpressionsCoverTheSet) {
  const fd::SweepConfig cfg;
  std::map<std::string, int> seen;
  for (std::int64_t i = 0; i < 500; ++i) {
    const auto s = fd::sample_scene(cfg, i, 42);
    ++seen[s.expression_name];
    if (s.expression_name == "neutral") {
      EXPECT_TRUE(s.expression.neutral());
    } else {
      EXPECT_EQ(s.expression.weights.at(s.expression_name), 1.0);
    }
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(SampleScene, LightDrawnFromBox) {
  fd::SweepConfig cfg;
  cfg.light_min = Vec3(-1, 0, 0);
  cfg.light_max = Vec3(1, 0.5, 0.2);
  for (std::int64_t i = 0; i < 1000; ++i) {
    const auto p = fd::sample_scene(cfg, i, 3).light.position;
    ASSERT_TRUE((p.array() >= cfg.light_min.array()).all() && (p.array() <= cfg.light_max.array()).all());
  }
}

TEST(SampleScene, RejectsInvalidConfig) {
  fd::SweepConfig inverted;
  inverted.distance_m = {1.0, 0.7};
  EXPECT_THROW(fd::sample_scene(inverted, 0, 0), fd::ConfigError);
  fd::SweepConfig empty;
  empty.expressions.clear();
  EXPECT_THROW(fd::sample_scene(empty, 0, 0), fd::ConfigError);
  fd::SweepConfig nan;
  nan.yaw_deg.max = NAN;
  EXPECT_THROW(fd::sample_scene(nan, 0, 0), fd::ConfigError);
  fd::SweepConfig box;
  box.light_min = Vec3(1, 1, 1);
  EXPECT_THROW(fd::sample_scene(box, 0, 0), fd::ConfigError);
  EXPECT_THROW(fd::sample_scene(fd::SweepConfig{}, -1, 0), fd::ConfigError);
}

TEST(LightDirection, AxisAligned) {
  fd::SceneSample s;
  s.light.position = Vec3(0, 0, 1);
  EXPECT_EQ(fd::light_direction(s, Vec3::Zero()), Vec3(0, 0, 1));
}

TEST(LightDirection, Diagonal) {
  fd::SceneSample s;
  s.light.position = Vec3(1, 1, 0);
  const Vec3 d = fd::light_direction(s, Vec3::Zero());
  EXPECT_NEAR(d.x(), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(d.y(), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_EQ(d.z(), 0.0);
}

TEST(LightDirection, CoincidentIsGeometryError) {
  fd::SceneSample s;
  s.light.position = Vec3(0.3, 0.2, -1);
  EXPECT_THROW(fd::light_direction(s, s.light.position), fd::GeometryError);
}

TEST(LightDirection, UnitLength) {
  const fd::SweepConfig cfg;
  for (std::int64_t i = 0; i < 1000; ++i) {
    const auto s = fd::sample_scene(cfg, i, 42);
    ASSERT_NEAR(fd::light_direction(s, s.head_origin()).norm(), 1.0, 1e-9);
  }
}

TEST(PointLight, ValidateRejectsBadValues) {
  fd::PointLight l;
  l.intensity = -1;
  EXPECT_THROW(l.validate(), fd::ConfigError);
  l = {};
  l.color = Vec3(1.5, 0, 0);
  EXPECT_THROW(l.validate(), fd::ConfigError);
}

TEST(RigidTransform, EulerRoundTripAndInverse) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(-179, 179), p(-89, 89);
  for (int i = 0; i < 1000; ++i) {
    const double y = a(rng), pi = p(rng), r = a(rng);
    const auto t = fd::RigidTransform::from_euler_deg(y, pi, r, Vec3(1, 2, 3));
    const auto e = fd::to_euler_deg(t.rotation);
    ASSERT_NEAR(e.yaw_deg, y, 1e-8);
    ASSERT_NEAR(e.pitch_deg, pi, 1e-8);
    ASSERT_NEAR(e.roll_deg, r, 1e-8);
    const auto id = t * t.inverse();
    ASSERT_LE((id.rotation - fd::Mat3::Identity()).norm(), 1e-12);
    ASSERT_LE(id.translation.norm(), 1e-12);
  }
}
