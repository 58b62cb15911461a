#include "facedepth/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError("malformed number '" + std::string(tok) + "'", line_no);
  }
  return value;
}

long parse_index(std::string_view tok, std::size_t line_no) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || value == 0) {
    throw ParseError("malformed index '" + std::string(tok) + "'", line_no);
  }
  return value;
}

// Resolves a 1-based or negative OBJ index against `count` defined elements.
std::uint32_t resolve_index(long raw, std::size_t count, std::size_t line_no, const char* what) {
  const long n = static_cast<long>(count);
  const long idx = raw > 0 ? raw - 1 : n + raw;
  if (idx < 0 || idx >= n) {
    throw ParseError(std::string(what) + " index " + std::to_string(raw) + " out of range", line_no);
  }
  return static_cast<std::uint32_t>(idx);
}

struct Corner {
  std::uint32_t v = 0;
  std::optional<std::uint32_t> vt;
};

Corner parse_corner(std::string_view tok, std::size_t nv, std::size_t nvt, std::size_t nvn,
                    std::size_t line_no) {
  std::array<std::string_view, 3> parts{};
  std::size_t part = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tok.size(); ++i) {
    if (i == tok.size() || tok[i] == '/') {
      if (part >= parts.size()) throw ParseError("malformed face corner '" + std::string(tok) + "'", line_no);
      parts[part++] = tok.substr(start, i - start);
      start = i + 1;
    }
  }
  Corner c;
  c.v = resolve_index(parse_index(parts[0], line_no), nv, line_no, "vertex");
  if (part > 1 && !parts[1].empty()) {
    c.vt = resolve_index(parse_index(parts[1], line_no), nvt, line_no, "texcoord");
  }
  if (part > 2 && !parts[2].empty()) {
    resolve_index(parse_index(parts[2], line_no), nvn, line_no, "normal");
  }
  return c;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void TriMesh::validate() const {
  const std::size_t nv = vertices.size();
  for (const auto& v : vertices) {
    if (!finite(v)) throw GeometryError("non-finite vertex");
  }
  for (const auto& t : triangles) {
    for (auto i : t) {
      if (i >= nv) throw GeometryError("triangle index out of range");
    }
  }
  if (!normals.empty() && normals.size() != nv) throw GeometryError("normal count mismatch");
  if (!colors.empty() && colors.size() != nv) throw GeometryError("color count mismatch");
  if (!tex_triangles.empty()) {
    if (tex_triangles.size() != triangles.size()) throw GeometryError("texture face count mismatch");
    for (const auto& t : tex_triangles) {
      for (auto i : t) {
        if (i >= texcoords.size()) throw GeometryError("texcoord index out of range");
      }
    }
  }
  for (const auto& [name, deltas] : morphs) {
    if (deltas.size() != nv) throw GeometryError("morph '" + name + "' has wrong length");
    for (const auto& d : deltas) {
      if (!finite(d)) throw GeometryError("morph '" + name + "' has non-finite delta");
    }
  }
}

bool ExpressionWeights::neutral() const {
  return std::all_of(weights.begin(), weights.end(), [](const auto& kv) { return kv.second == 0.0; });
}

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::size_t normal_count = 0;
  bool all_faces_textured = true;
  std::vector<Triangle> tex_tris;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string_view kw = tok[0];

    if (kw == "v") {
      if (tok.size() != 4 && tok.size() != 5 && tok.size() != 7) {
        throw ParseError("vertex record needs 3 coordinates", line_no);
      }
      mesh.vertices.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                 parse_double(tok[3], line_no));
      if (tok.size() == 7) {
        if (mesh.colors.size() + 1 != mesh.vertices.size()) {
          throw ParseError("vertex colors must be given for every vertex", line_no);
        }
        mesh.colors.emplace_back(parse_double(tok[4], line_no), parse_double(tok[5], line_no),
                                 parse_double(tok[6], line_no));
      } else if (!mesh.colors.empty()) {
        throw ParseError("vertex colors must be given for every vertex", line_no);
      }
    } else if (kw == "vt") {
      if (tok.size() < 2 || tok.size() > 4) throw ParseError("texcoord record needs 1-3 values", line_no);
      const double u = parse_double(tok[1], line_no);
      const double v = tok.size() > 2 ? parse_double(tok[2], line_no) : 0.0;
      if (tok.size() > 3) parse_double(tok[3], line_no);
      mesh.texcoords.emplace_back(u, v);
    } else if (kw == "vn") {
      if (tok.size() != 4) throw ParseError("normal record needs 3 components", line_no);
      for (int i = 1; i < 4; ++i) parse_double(tok[i], line_no);
      ++normal_count;
    } else if (kw == "f") {
      if (tok.size() < 4) throw ParseError("face needs at least 3 vertices", line_no);
      std::vector<Corner> corners;
      corners.reserve(tok.size() - 1);
      for (std::size_t i = 1; i < tok.size(); ++i) {
        corners.push_back(parse_corner(tok[i], mesh.vertices.size(), mesh.texcoords.size(),
                                       normal_count, line_no));
      }
      const bool textured = std::all_of(corners.begin(), corners.end(),
                                        [](const Corner& c) { return c.vt.has_value(); });
      all_faces_textured = all_faces_textured && textured;
      for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
        mesh.triangles.push_back({corners[0].v, corners[i].v, corners[i + 1].v});
        if (textured) tex_tris.push_back({*corners[0].vt, *corners[i].vt, *corners[i + 1].vt});
      }
    } else if (kw == "o" || kw == "g" || kw == "s" || kw == "mtllib" || kw == "usemtl") {
      // grouping and material records carry no geometry
    } else {
      throw ParseError("unsupported record '" + std::string(kw) + "'", line_no);
    }
  }

  if (mesh.triangles.empty()) throw EmptyMeshError("mesh has no faces");
  if (all_faces_textured) mesh.tex_triangles = std::move(tex_tris);
  return recompute_normals(mesh);
}

std::string serialize_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.triangles.size() * 24);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    out += "v";
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      append_number(out, v[k]);
    }
    if (!mesh.colors.empty()) {
      for (int k = 0; k < 3; ++k) {
        out += ' ';
        append_number(out, mesh.colors[i][k]);
      }
    }
    out += '\n';
  }
  for (const auto& t : mesh.texcoords) {
    out += "vt ";
    append_number(out, t.x());
    out += ' ';
    append_number(out, t.y());
    out += '\n';
  }
  const bool textured = !mesh.tex_triangles.empty();
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    out += 'f';
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      out += std::to_string(mesh.triangles[f][k] + 1);
      if (textured) {
        out += '/';
        out += std::to_string(mesh.tex_triangles[f][k] + 1);
      }
    }
    out += '\n';
  }
  return out;
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_obj(ss.str());
  } catch (const EmptyMeshError& e) {
    throw EmptyMeshError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

TriMesh attach_morphs(TriMesh base, const std::filesystem::path& manifest) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(manifest.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("morph manifest " + manifest.string() + ": " + e.message(), e.line());
  }
  const auto dir = manifest.parent_path();
  for (const auto& [name, node] : tree) {
    if (!node.empty()) throw ParseError("morph manifest must not contain sections: " + name);
    std::filesystem::path file = node.data();
    if (file.is_relative()) file = dir / file;
    const TriMesh target = load_obj(file);
    if (target.vertices.size() != base.vertices.size()) {
      throw ConfigError("morph '" + name + "' has " + std::to_string(target.vertices.size()) +
                        " vertices, base has " + std::to_string(base.vertices.size()));
    }
    std::vector<Vec3> deltas(base.vertices.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) deltas[i] = target.vertices[i] - base.vertices[i];
    base.morphs[name] = std::move(deltas);
  }
  return base;
}

TriMesh apply_expression(const TriMesh& mesh, const ExpressionWeights& w) {
  TriMesh out = mesh;
  for (const auto& [name, raw] : w.weights) {
    const auto it = mesh.morphs.find(name);
    if (it == mesh.morphs.end()) throw ConfigError("unknown expression '" + name + "'");
    if (!std::isfinite(raw)) throw ConfigError("non-finite weight for expression '" + name + "'");
    const double weight = std::clamp(raw, 0.0, 1.0);
    if (weight == 0.0) continue;
    const auto& deltas = it->second;
    for (std::size_t i = 0; i < out.vertices.size(); ++i) out.vertices[i] += weight * deltas[i];
  }
  return recompute_normals(out);
}

TriMesh transform_mesh(const TriMesh& mesh, const RigidTransform& pose) {
  pose.validate();
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = pose.apply(v);
  for (auto& n : out.normals) n = pose.apply_vector(n);
  for (auto& [name, deltas] : out.morphs) {
    for (auto& d : deltas) d = pose.apply_vector(d);
  }
  return out;
}

TriMesh recompute_normals(const TriMesh& mesh) {
  TriMesh out = mesh;
  std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    // |cross| is twice the area, so the unnormalized cross is area-weighted.
    const Vec3 n = (b - a).cross(c - a);
    if (!(n.squaredNorm() > 0.0) || !n.allFinite()) continue;
    for (auto i : t) acc[i] += n;
  }
  for (auto& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  out.normals = std::move(acc);
  return out;
}

std::vector<std::uint32_t> unshaded_vertices(const TriMesh& mesh) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < mesh.normals.size(); ++i) {
    if (mesh.normals[i].squaredNorm() == 0.0) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

Aabb bounding_box(const TriMesh& mesh) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Aabb box{Vec3::Constant(inf), Vec3::Constant(-inf)};
  for (const auto& v : mesh.vertices) {
    box.min = box.min.cwiseMin(v);
    box.max = box.max.cwiseMax(v);
  }
  return box;
}

double triangle_area(const TriMesh& mesh, std::size_t tri) {
  const auto& t = mesh.triangles.at(tri);
  const Vec3& a = mesh.vertices[t[0]];
  return 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
}

}  // namespace facedepth
