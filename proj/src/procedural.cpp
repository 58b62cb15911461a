#include "facedepth/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

// Unit-sphere direction grid shared by the sphere and the head.
struct Grid {
  std::vector<Vec3> dirs;
  std::vector<Triangle> triangles;
};

Grid lat_long_grid(int stacks, int slices) {
  if (stacks < 2 || slices < 3) throw ConfigError("sphere needs stacks >= 2 and slices >= 3");
  Grid g;
  g.dirs.emplace_back(0.0, 1.0, 0.0);
  for (int i = 1; i < stacks; ++i) {
    const double theta = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / slices;
      g.dirs.emplace_back(std::sin(theta) * std::sin(phi), std::cos(theta), std::sin(theta) * std::cos(phi));
    }
  }
  g.dirs.emplace_back(0.0, -1.0, 0.0);
  const auto ring = [slices](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * slices + (j % slices));
  };
  const auto south = static_cast<std::uint32_t>(g.dirs.size() - 1);
  for (int j = 0; j < slices; ++j) {
    g.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  }
  for (int i = 1; i + 1 < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      g.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      g.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  for (int j = 0; j < slices; ++j) {
    g.triangles.push_back({ring(stacks - 1, j), south, ring(stacks - 1, j + 1)});
  }
  return g;
}

double gauss(double x, double y, double cx, double cy, double sx, double sy) {
  const double dx = (x - cx) / sx;
  const double dy = (y - cy) / sy;
  return std::exp(-(dx * dx + dy * dy));
}

}  // namespace

TriMesh make_uv_sphere(const Vec3& center, double radius, int stacks, int slices) {
  Grid g = lat_long_grid(stacks, slices);
  TriMesh mesh;
  mesh.vertices.reserve(g.dirs.size());
  for (const auto& d : g.dirs) mesh.vertices.push_back(center + radius * d);
  mesh.triangles = std::move(g.triangles);
  return recompute_normals(mesh);
}

TriMesh make_quad(double z, double half_width, double half_height) {
  TriMesh mesh;
  mesh.vertices = {Vec3(-half_width, -half_height, z), Vec3(half_width, -half_height, z),
                   Vec3(half_width, half_height, z), Vec3(-half_width, half_height, z)};
  mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
  return recompute_normals(mesh);
}

TriMesh make_demo_head(int stacks, int slices) {
  Grid g = lat_long_grid(stacks, slices);
  const Vec3 semi(0.078, 0.105, 0.095);

  TriMesh mesh;
  mesh.vertices.reserve(g.dirs.size());
  std::vector<Vec3> happy, sad, angry, scared;
  for (const auto& d : g.dirs) {
    Vec3 p = d.cwiseProduct(semi);
    // Only the front hemisphere carries facial features.
    const double front = std::max(0.0, d.z());
    const double x = p.x(), y = p.y();
    p.z() += front * (0.028 * gauss(x, y, 0.0, -0.005, 0.011, 0.028)     // nose
                      - 0.008 * gauss(std::abs(x), y, 0.03, 0.02, 0.014, 0.01)  // eye sockets
                      + 0.006 * gauss(x, y, 0.0, -0.085, 0.03, 0.015));  // chin
    mesh.vertices.push_back(p);

    const double corners = front * gauss(std::abs(x), y, 0.026, -0.045, 0.012, 0.010);
    const double mouth = front * gauss(x, y, 0.0, -0.05, 0.02, 0.012);
    const double brows = front * gauss(std::abs(x), y, 0.028, 0.038, 0.016, 0.008);
    const double inner_brows = front * gauss(std::abs(x), y, 0.012, 0.034, 0.008, 0.008);
    happy.emplace_back(0.004 * corners * (x > 0 ? 1 : -1), 0.007 * corners, 0.002 * corners);
    sad.emplace_back(0.0, -0.006 * corners + 0.003 * inner_brows, -0.001 * corners);
    angry.emplace_back(-0.002 * inner_brows * (x > 0 ? 1 : -1), -0.005 * brows - 0.004 * inner_brows,
                       0.002 * brows - 0.002 * mouth);
    scared.emplace_back(0.0, 0.006 * brows - 0.008 * mouth, -0.004 * mouth);
  }
  mesh.triangles = std::move(g.triangles);
  mesh.morphs["happy"] = std::move(happy);
  mesh.morphs["sad"] = std::move(sad);
  mesh.morphs["angry"] = std::move(angry);
  mesh.morphs["scared"] = std::move(scared);
  return recompute_normals(mesh);
}

RgbImage make_gradient_background(int width, int height, Rgb8 top, Rgb8 bottom) {
  RgbImage img(width, height);
  for (int y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    const auto mix = [t](std::uint8_t a, std::uint8_t b) {
      return static_cast<std::uint8_t>(std::lround(a + (b - a) * t));
    };
    const Rgb8 c{mix(top.r, bottom.r), mix(top.g, bottom.g), mix(top.b, bottom.b)};
    for (int x = 0; x < width; ++x) img.at(x, y) = c;
  }
  return img;
}

}  // namespace facedepth
