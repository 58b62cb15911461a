#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "facedepth/error.hpp"
#include "facedepth/mesh.hpp"
#include "facedepth/procedural.hpp"
#include "test_util.hpp"

namespace fd = facedepth;
using fd::Vec3;

namespace {

fd::TriMesh unit_cube() {
  return fd::parse_obj(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "v 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
      "f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n");
}

bool all_finite(const fd::TriMesh& m) {
  for (const auto& v : m.vertices) if (!v.allFinite()) return false;
  for (const auto& n : m.normals) if (!n.allFinite()) return false;
  for (const auto& [_, d] : m.morphs)
    for (const auto& x : d) if (!x.allFinite()) return false;
  return true;
}

}  // namespace

TEST(ParseObj, SingleTriangle) {
  const auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3");
  ASSERT_EQ(m.vertices.size(), 3u);
  ASSERT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.triangles[0], (fd::Triangle{0, 1, 2}));
}

TEST(ParseObj, NegativeIndicesMatchPositive) {
  const auto a = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3");
  const auto b = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1");
  EXPECT_EQ(a, b);
}

TEST(ParseObj, QuadIsFanTriangulated) {
  const auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[0], (fd::Triangle{0, 1, 2}));
  EXPECT_EQ(m.triangles[1], (fd::Triangle{0, 2, 3}));
}

TEST(ParseObj, PolygonEmitsNMinusTwoTriangles) {
  for (int n = 3; n <= 9; ++n) {
    std::string text;
    std::string face = "f";
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * M_PI * i / n;
      text += "v " + std::to_string(std::cos(a)) + " " + std::to_string(std::sin(a)) + " 0\n";
      face += " " + std::to_string(i + 1);
    }
    EXPECT_EQ(fd::parse_obj(text + face + "\n").triangles.size(), static_cast<std::size_t>(n - 2));
  }
}

TEST(ParseObj, ToleratesCommonRecordsAndCrlf) {
  const auto m = fd::parse_obj(
      "# comment\r\nmtllib head.mtl\r\no Head\r\ng face\r\ns 1\r\nusemtl skin\r\n"
      "v 0 0 0\r\nv 1 0 0\r\nv 0 1 0\r\nvt 0 0\r\nvt 1 0\r\nvt 0 1\r\nvn 0 0 1\r\n"
      "f 1/1/1 2/2/1 3/3/1\r\n");
  EXPECT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.texcoords.size(), 3u);
  ASSERT_EQ(m.tex_triangles.size(), 1u);
  EXPECT_EQ(m.tex_triangles[0], (fd::Triangle{0, 1, 2}));
}

TEST(ParseObj, VertexColorsBecomeAlbedo) {
  const auto m = fd::parse_obj("v 0 0 0 1 0 0\nv 1 0 0 0 1 0\nv 0 1 0 0 0 1\nf 1 2 3\n");
  ASSERT_EQ(m.colors.size(), 3u);
  EXPECT_EQ(m.colors[1], Vec3(0, 1, 0));
}

TEST(ParseObj, MultipleObjectsMerge) {
  const auto m = fd::parse_obj(
      "o a\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\no b\nv 0 0 1\nv 1 0 1\nv 0 1 1\nf 4 5 6\nf -3 -2 -1\n");
  EXPECT_EQ(m.vertices.size(), 6u);
  ASSERT_EQ(m.triangles.size(), 3u);
  EXPECT_EQ(m.triangles[2], (fd::Triangle{3, 4, 5}));
}

TEST(ParseObj, MalformedNumberReportsLine) {
  try {
    fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1x 0\nf 1 2 3\n");
    FAIL() << "no exception";
  } catch (const fd::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseObj, IndexOutOfRangeIsParseError) {
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), fd::ParseError);
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -4 1 2\n"), fd::ParseError);
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"), fd::ParseError);
}

TEST(ParseObj, ZeroFacesIsEmptyMeshError) {
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\n"), fd::EmptyMeshError);
  EXPECT_THROW(fd::parse_obj(""), fd::EmptyMeshError);
}

TEST(ParseObj, UnknownRecordRejected) {
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nbogus 1\nf 1 2 3\n"), fd::ParseError);
}

TEST(ParseObj, FaceWithTooFewVertices) {
  EXPECT_THROW(fd::parse_obj("v 0 0 0\nv 1 0 0\nf 1 2\n"), fd::ParseError);
}

TEST(ObjRoundTrip, SerializeThenParseIsIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    fd::TriMesh m = fd::make_uv_sphere(Vec3(u(rng), u(rng), u(rng)), 0.1 + std::abs(u(rng)), 5 + trial, 7 + trial);
    for (auto& v : m.vertices) v += Vec3(u(rng), u(rng), u(rng)) * 1e-3;
    const fd::TriMesh once = fd::parse_obj(fd::serialize_obj(m));
    EXPECT_EQ(once.vertices, m.vertices);
    EXPECT_EQ(once.triangles, m.triangles);
    EXPECT_EQ(fd::parse_obj(fd::serialize_obj(once)), once);
  }
}

TEST(ObjRoundTrip, TexturesAndColorsSurvive) {
  const auto m = fd::parse_obj(
      "v 0 0 0 0.1 0.2 0.3\nv 1 0 0 0.4 0.5 0.6\nv 0 1 0 0.7 0.8 0.9\nvt 0.25 0.5\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n");
  EXPECT_EQ(fd::parse_obj(fd::serialize_obj(m)), m);
}

TEST(ApplyExpression, ZeroWeightsIsIdentity) {
  const auto head = fd::make_demo_head(24, 32);
  fd::ExpressionWeights w;
  for (const auto& [name, _] : head.morphs) w.weights[name] = 0.0;
  EXPECT_EQ(fd::apply_expression(head, w).vertices, head.vertices);
}

TEST(ApplyExpression, HalfWeightIsMidpoint) {
  auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  m.morphs["smile"] = {Vec3(2, 0, 0), Vec3::Zero(), Vec3::Zero()};
  const auto out = fd::apply_expression(m, {{{"smile", 0.5}}});
  EXPECT_EQ(out.vertices[0], Vec3(1, 0, 0));
  EXPECT_EQ(out.triangles, m.triangles);
}

TEST(ApplyExpression, BlendingIsAdditive) {
  auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const Vec3 d1(0.01, 0.02, 0.03), d2(-0.005, 0.04, 0.0);
  m.morphs["happy"] = {d1, d1, d1};
  m.morphs["sad"] = {d2, d2, d2};
  const auto out = fd::apply_expression(m, {{{"happy", 1.0}, {"sad", 1.0}}});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(out.vertices[i].isApprox(m.vertices[i] + d1 + d2, 1e-15));
}

TEST(ApplyExpression, WeightsAreClamped) {
  auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  m.morphs["e"] = {Vec3(1, 0, 0), Vec3::Zero(), Vec3::Zero()};
  EXPECT_EQ(fd::apply_expression(m, {{{"e", 3.0}}}).vertices[0], Vec3(1, 0, 0));
  EXPECT_EQ(fd::apply_expression(m, {{{"e", -2.0}}}).vertices[0], Vec3(0, 0, 0));
}

TEST(ApplyExpression, UnknownNameOrNonFiniteWeightRejected) {
  const auto head = fd::make_demo_head(12, 16);
  EXPECT_THROW(fd::apply_expression(head, {{{"surprised", 1.0}}}), fd::ConfigError);
  EXPECT_THROW(fd::apply_expression(head, {{{"happy", std::nan("")}}}), fd::ConfigError);
}

TEST(ApplyExpression, LinearInWeight) {
  const auto head = fd::make_demo_head(24, 32);
  const auto full = fd::apply_expression(head, {{{"happy", 1.0}}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double w = u(rng);
    const auto out = fd::apply_expression(head, {{{"happy", w}}});
    for (std::size_t i = 0; i < head.vertices.size(); ++i) {
      const Vec3 expected = head.vertices[i] + w * (full.vertices[i] - head.vertices[i]);
      ASSERT_LE((out.vertices[i] - expected).cwiseAbs().maxCoeff(), 1e-7);
    }
  }
}

TEST(TransformMesh, IdentityLeavesVerticesUnchanged) {
  const auto head = fd::make_demo_head(12, 16);
  EXPECT_EQ(fd::transform_mesh(head, fd::RigidTransform{}).vertices, head.vertices);
}

TEST(TransformMesh, YawHalfTurnTwiceIsIdentity) {
  const auto head = fd::make_demo_head(12, 16);
  const auto pose = fd::RigidTransform::from_euler_deg(180, 0, 0);
  const auto twice = fd::transform_mesh(fd::transform_mesh(head, pose), pose);
  for (std::size_t i = 0; i < head.vertices.size(); ++i)
    EXPECT_LE((twice.vertices[i] - head.vertices[i]).norm(), 1e-6);
}

TEST(TransformMesh, TranslationMovesBoxCenter) {
  const auto head = fd::make_demo_head(12, 16);
  const Vec3 t(0, 0, -0.85);
  const auto moved = fd::transform_mesh(head, {fd::Mat3::Identity(), t});
  EXPECT_LE((fd::bounding_box(moved).center() - fd::bounding_box(head).center() - t).norm(), 1e-15);
}

TEST(TransformMesh, RejectsImproperOrNonFinitePose) {
  const auto head = fd::make_demo_head(12, 16);
  fd::RigidTransform bad;
  bad.translation.x() = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fd::transform_mesh(head, bad), fd::ConfigError);
  fd::RigidTransform mirror;
  mirror.rotation(0, 0) = -1.0;
  EXPECT_THROW(fd::transform_mesh(head, mirror), fd::ConfigError);
  fd::RigidTransform skew;
  skew.rotation(0, 1) = 0.1;
  EXPECT_THROW(fd::transform_mesh(head, skew), fd::ConfigError);
}

TEST(TransformMesh, PreservesDistancesAndAreas) {
  const auto head = fd::make_demo_head(16, 24);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-180, 180), tr(-2, 2);
  for (int t = 0; t < 50; ++t) {
    const auto pose = fd::RigidTransform::from_euler_deg(ang(rng), ang(rng) / 2.1, ang(rng),
                                                         Vec3(tr(rng), tr(rng), tr(rng)));
    const auto out = fd::transform_mesh(head, pose);
    for (std::size_t i = 0; i + 7 < head.vertices.size(); i += 37) {
      const double a = (head.vertices[i] - head.vertices[i + 7]).norm();
      const double b = (out.vertices[i] - out.vertices[i + 7]).norm();
      ASSERT_NEAR(a, b, 1e-6 * a + 1e-15);
    }
    for (std::size_t f = 0; f < head.triangles.size(); f += 13) {
      const double a = fd::triangle_area(head, f);
      ASSERT_NEAR(fd::triangle_area(out, f), a, 1e-6 * a + 1e-18);
    }
    ASSERT_TRUE(all_finite(out));
    for (std::size_t i = 0; i < head.normals.size(); i += 41)
      ASSERT_LE((out.normals[i] - pose.rotation * head.normals[i]).norm(), 1e-12);
  }
}

TEST(RecomputeNormals, PlanarCcwTriangleFacesPlusZ) {
  const auto m = fd::recompute_normals(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"));
  for (const auto& n : m.normals) EXPECT_EQ(n, Vec3(0, 0, 1));
}

TEST(RecomputeNormals, CubeCornersAreUnitAndMatchFormula) {
  const auto cube = fd::recompute_normals(unit_cube());
  ASSERT_EQ(cube.normals.size(), 8u);
  // Independent area-weighted sum over faces.
  std::vector<Vec3> acc(8, Vec3::Zero());
  for (const auto& t : cube.triangles) {
    const Vec3 c = (cube.vertices[t[1]] - cube.vertices[t[0]]).cross(cube.vertices[t[2]] - cube.vertices[t[0]]);
    for (auto i : t) acc[i] += c;
  }
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(cube.normals[i].norm(), 1.0, 1e-12);
    EXPECT_LE((cube.normals[i] - acc[i].normalized()).norm(), 1e-12);
    // Corners point away from the cube center.
    EXPECT_GT(cube.normals[i].dot(cube.vertices[i] - Vec3::Constant(0.5)), 0.0);
  }
}

TEST(RecomputeNormals, DegenerateFaceContributesNothing) {
  const auto m = fd::recompute_normals(fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 5 5 5\nf 1 2 3\nf 4 4 1\n"));
  EXPECT_TRUE(all_finite(m));
  EXPECT_EQ(m.normals[0], Vec3(0, 0, 1));
  EXPECT_EQ(m.normals[3], Vec3::Zero());
  EXPECT_EQ(fd::unshaded_vertices(m), std::vector<std::uint32_t>{3});
}

TEST(RecomputeNormals, UnitLengthOnHead) {
  const auto head = fd::recompute_normals(fd::make_demo_head());
  for (const auto& n : head.normals) ASSERT_NEAR(n.norm(), 1.0, 1e-6);
}

TEST(TriMeshValidate, CatchesBadIndexAndMorphLength) {
  auto m = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  auto bad = m;
  bad.triangles[0][2] = 3;
  EXPECT_THROW(bad.validate(), fd::GeometryError);
  bad = m;
  bad.morphs["x"] = {Vec3::Zero()};
  EXPECT_THROW(bad.validate(), fd::GeometryError);
}

TEST(Morphs, AttachFromManifest) {
  const fd::test::TempDir dir;
  const auto base = fd::parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  fd::test::write_file(dir.path() / "base.obj", fd::serialize_obj(base));
  fd::test::write_file(dir.path() / "smile.obj", "v 0 0 0.5\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  fd::test::write_file(dir.path() / "bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\n");
  fd::test::write_file(dir.path() / "morphs.ini", "; expressions\nsmile = smile.obj\n");
  fd::test::write_file(dir.path() / "wrong.ini", "bad = bad.obj\n");
  const auto m = fd::attach_morphs(fd::load_obj(dir.path() / "base.obj"), dir.path() / "morphs.ini");
  ASSERT_EQ(m.morphs.count("smile"), 1u);
  EXPECT_EQ(m.morphs.at("smile")[0], Vec3(0, 0, 0.5));
  EXPECT_EQ(fd::apply_expression(m, {{{"smile", 1.0}}}).vertices[0], Vec3(0, 0, 0.5));
  EXPECT_THROW(fd::attach_morphs(base, dir.path() / "wrong.ini"), fd::ConfigError);
}

TEST(MeshFuzz, NoOperationIntroducesNonFinite) {
  const auto head = fd::make_demo_head(24, 32);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1), ang(-90, 90);
  for (int t = 0; t < 100; ++t) {
    fd::ExpressionWeights w;
    for (const auto& [name, _] : head.morphs) w.weights[name] = u(rng);
    const auto out = fd::transform_mesh(fd::apply_expression(head, w),
                                        fd::RigidTransform::from_euler_deg(ang(rng), ang(rng) * 0.9, ang(rng)));
    ASSERT_TRUE(all_finite(out));
  }
}
