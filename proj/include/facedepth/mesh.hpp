#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "facedepth/geometry.hpp"

namespace facedepth {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh with named morph targets.
///
/// Positions are in meters. `normals` is either empty or has one entry per
/// vertex. `texcoords`/`tex_triangles` and `colors` are optional and carried
/// through every operation untouched: `tex_triangles` is empty or parallel to
/// `triangles`, `colors` is empty or parallel to `vertices` (albedo in [0,1]).
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  std::vector<Triangle> triangles;
  std::vector<Vec2> texcoords;
  std::vector<Triangle> tex_triangles;
  std::vector<Vec3> colors;
  /// Expression name -> per-vertex displacement (meters).
  std::map<std::string, std::vector<Vec3>> morphs;

  /// Throws GeometryError when an index, morph length, or optional channel
  /// length is inconsistent, or when any coordinate is non-finite.
  void validate() const;

  friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

/// Expression name -> weight. Weights are clamped into [0, 1] on use.
struct ExpressionWeights {
  std::map<std::string, double> weights;

  bool neutral() const;
  friend bool operator==(const ExpressionWeights&, const ExpressionWeights&) = default;
};

/// Parses a Wavefront OBJ stream. Polygons are fan-triangulated; 1-based and
/// negative indices are accepted. Multiple `o`/`g` groups merge into one mesh.
/// Normals are recomputed from geometry; `vn` records are only range-checked.
/// A `v x y z r g b` record supplies a per-vertex albedo.
TriMesh parse_obj(std::string_view text);

/// Writes vertices (and colors, texcoords) and faces; parse_obj of the result
/// reproduces vertices, triangles and texture data exactly.
std::string serialize_obj(const TriMesh& mesh);

TriMesh load_obj(const std::filesystem::path& path);

/// Reads a morph manifest (`name = relative/or/absolute.obj` per line, `;`
/// comments) and attaches one morph per entry, computed as expression
/// vertices minus base vertices. Relative paths resolve against the
/// manifest's directory.
TriMesh attach_morphs(TriMesh base, const std::filesystem::path& manifest);

/// Blends morph targets: v_i + sum_e w_e * morphs[e][i]. Weights are clamped
/// into [0,1]; unknown names or non-finite weights throw ConfigError.
/// Normals of the result are recomputed.
TriMesh apply_expression(const TriMesh& mesh, const ExpressionWeights& w);

/// Rotates then translates vertices; rotates normals and morph deltas.
TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& pose);

/// Area-weighted vertex normals. Zero-area faces contribute nothing; vertices
/// with no contributing face get a zero normal (see unshaded_vertices).
TriMesh recompute_normals(const TriMesh& mesh);

/// Indices of vertices whose normal is zero after recompute_normals.
std::vector<std::uint32_t> unshaded_vertices(const TriMesh& mesh);

struct Aabb {
  Vec3 min;
  Vec3 max;
  Vec3 center() const { return 0.5 * (min + max); }
};

Aabb bounding_box(const TriMesh& mesh);
double triangle_area(const TriMesh& mesh, std::size_t tri);

}  // namespace facedepth
