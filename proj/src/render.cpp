#include "facedepth/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

constexpr std::int64_t kSubpixel = 256;

struct ClipVertex {
  Vec3 cam;  // camera frame, -z forward
  Vec3 world;
  Vec3 normal;
  Vec3 albedo;
  Vec2 uv;

  double depth() const { return -cam.z(); }
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.cam + t * (b.cam - a.cam), a.world + t * (b.world - a.world),
          a.normal + t * (b.normal - a.normal), a.albedo + t * (b.albedo - a.albedo),
          a.uv + t * (b.uv - a.uv)};
}

// Signed distance-like value of a camera-frame point to a clip plane; >= 0 is inside.
struct ClipPlane {
  Eigen::Vector4d coeffs;  // (a, b, c, d) applied to (x, y, z_view, 1)

  double eval(const ClipVertex& v) const {
    return coeffs[0] * v.cam.x() + coeffs[1] * v.cam.y() + coeffs[2] * v.depth() + coeffs[3];
  }
};

using Polygon = std::vector<ClipVertex>;

// Sutherland-Hodgman against one plane. Intersections are always computed
// from the inside endpoint towards the outside one, so an edge shared by two
// triangles yields bit-identical clip vertices in both.
void clip_polygon(const Polygon& in, const ClipPlane& plane, Polygon& out) {
  out.clear();
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& next = in[(i + 1) % n];
    const double dc = plane.eval(cur);
    const double dn = plane.eval(next);
    const bool cur_in = dc >= 0.0;
    const bool next_in = dn >= 0.0;
    if (cur_in) out.push_back(cur);
    if (cur_in != next_in) {
      if (cur_in) {
        out.push_back(lerp(cur, next, dc / (dc - dn)));
      } else {
        out.push_back(lerp(next, cur, dn / (dn - dc)));
      }
    }
  }
}

// Coverage uses the snapped fixed-point position, interpolation the exact one.
struct ScreenVertex {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double sx = 0.0;
  double sy = 0.0;
  double depth = 0.0;
  double inv_depth = 0.0;
  const ClipVertex* attrs = nullptr;
};

bool is_top_left(std::int64_t dx, std::int64_t dy) { return dy < 0 || (dy == 0 && dx > 0); }

double bilinear_channel(const RgbImage& tex, double u, double v, int ch) {
  // Texture v grows upwards; wrap into [0, 1).
  u -= std::floor(u);
  v -= std::floor(v);
  const double fx = u * tex.width() - 0.5;
  const double fy = (1.0 - v) * tex.height() - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;
  auto sample = [&](int x, int y) {
    x = std::clamp(x, 0, tex.width() - 1);
    y = std::clamp(y, 0, tex.height() - 1);
    const Rgb8& p = tex.at(x, y);
    return (ch == 0 ? p.r : ch == 1 ? p.g : p.b) / 255.0;
  };
  const double top = sample(x0, y0) * (1 - tx) + sample(x0 + 1, y0) * tx;
  const double bottom = sample(x0, y0 + 1) * (1 - tx) + sample(x0 + 1, y0 + 1) * tx;
  return top * (1 - ty) + bottom * ty;
}

std::uint8_t quantize(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

class Rasterizer {
 public:
  Rasterizer(const CameraRig& cam, const PointLight& light, const RenderOptions& options)
      : cam_(cam),
        intr_(intrinsics(cam)),
        light_(light),
        options_(options),
        zbuf_(cam.width_px, cam.height_px, std::numeric_limits<double>::infinity()),
        rgb_(cam.width_px, cam.height_px) {
    const double guard = 8.0 * std::max(cam.width_px, cam.height_px);
    const double xmin = -guard, xmax = cam.width_px + guard;
    const double ymin = -guard, ymax = cam.height_px + guard;
    // screen x = cx + fx * x / z, screen y = cy - fy * y / z, z = view depth
    planes_ = {
        ClipPlane{{0.0, 0.0, 1.0, -cam.near_clip_m}},
        ClipPlane{{intr_.fx, 0.0, intr_.cx - xmin, 0.0}},
        ClipPlane{{-intr_.fx, 0.0, xmax - intr_.cx, 0.0}},
        ClipPlane{{0.0, -intr_.fy, intr_.cy - ymin, 0.0}},
        ClipPlane{{0.0, intr_.fy, ymax - intr_.cy, 0.0}},
    };
  }

  void draw(const TriMesh& mesh) {
    const TriMesh* shaded = &mesh;
    TriMesh with_normals;
    if (mesh.normals.size() != mesh.vertices.size()) {
      with_normals = recompute_normals(mesh);
      shaded = &with_normals;
    }
    const bool textured = options_.texture && !mesh.tex_triangles.empty() && !options_.texture->empty();
    textured_ = textured;
    const Mat3 rt = cam_.pose.rotation.transpose();

    std::vector<Vec3> cam_pos(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      cam_pos[i] = rt * (mesh.vertices[i] - cam_.pose.translation);
    }

    Polygon poly, scratch;
    for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
      const Triangle& tri = mesh.triangles[f];
      poly.clear();
      for (int k = 0; k < 3; ++k) {
        const auto i = tri[k];
        ClipVertex v;
        v.cam = cam_pos[i];
        v.world = mesh.vertices[i];
        v.normal = shaded->normals[i];
        v.albedo = mesh.colors.empty() ? options_.albedo : mesh.colors[i];
        v.uv = textured ? mesh.texcoords[mesh.tex_triangles[f][k]] : Vec2::Zero();
        poly.push_back(v);
      }
      for (const auto& plane : planes_) {
        const bool all_inside = std::all_of(poly.begin(), poly.end(),
                                            [&](const ClipVertex& v) { return plane.eval(v) >= 0.0; });
        if (all_inside) continue;
        clip_polygon(poly, plane, scratch);
        poly.swap(scratch);
        if (poly.size() < 3) break;
      }
      if (poly.size() < 3) continue;
      draw_polygon(poly);
    }
  }

  FramePacket finish() && {
    FramePacket out;
    out.depth = DepthMap(cam_.width_px, cam_.height_px, kInvalidDepth);
    out.mask = Mask(cam_.width_px, cam_.height_px, 0);
    for (std::size_t i = 0; i < zbuf_.size(); ++i) {
      if (std::isfinite(zbuf_[i])) {
        out.depth[i] = zbuf_[i];
        out.mask[i] = 1;
      }
    }
    out.rgb = std::move(rgb_);
    out.meta.intrinsics = intr_;
    return out;
  }

 private:
  void draw_polygon(const Polygon& poly) {
    std::vector<ScreenVertex> sv(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const double z = poly[i].depth();
      const double sx = intr_.cx + intr_.fx * poly[i].cam.x() / z;
      const double sy = intr_.cy - intr_.fy * poly[i].cam.y() / z;
      sv[i] = {std::llround(sx * kSubpixel), std::llround(sy * kSubpixel), sx, sy, z, 1.0 / z, &poly[i]};
    }
    for (std::size_t i = 1; i + 1 < sv.size(); ++i) draw_triangle(sv[0], sv[i], sv[i + 1]);
  }

  void draw_triangle(ScreenVertex a, ScreenVertex b, ScreenVertex c) {
    std::int64_t area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (area == 0) return;
    if (area < 0) {
      std::swap(b, c);
      area = -area;
    }

    const std::int64_t min_x = std::min({a.x, b.x, c.x});
    const std::int64_t max_x = std::max({a.x, b.x, c.x});
    const std::int64_t min_y = std::min({a.y, b.y, c.y});
    const std::int64_t max_y = std::max({a.y, b.y, c.y});
    constexpr std::int64_t half = kSubpixel / 2;
    auto first_pixel = [](std::int64_t lo) {
      // smallest p with p * S + S/2 >= lo
      const std::int64_t n = lo - half;
      return n >= 0 ? (n + kSubpixel - 1) / kSubpixel : -((-n) / kSubpixel);
    };
    auto last_pixel = [](std::int64_t hi) {
      const std::int64_t n = hi - half;
      return n >= 0 ? n / kSubpixel : -((-n + kSubpixel - 1) / kSubpixel);
    };
    const std::int64_t px0 = std::max<std::int64_t>(first_pixel(min_x), 0);
    const std::int64_t px1 = std::min<std::int64_t>(last_pixel(max_x), cam_.width_px - 1);
    const std::int64_t py0 = std::max<std::int64_t>(first_pixel(min_y), 0);
    const std::int64_t py1 = std::min<std::int64_t>(last_pixel(max_y), cam_.height_px - 1);
    if (px0 > px1 || py0 > py1) return;

    struct Edge {
      std::int64_t dx, dy, ox, oy, bias;
      std::int64_t at(std::int64_t x, std::int64_t y) const { return dx * (y - oy) - dy * (x - ox) - bias; }
    };
    auto make_edge = [](const ScreenVertex& p, const ScreenVertex& q) {
      const std::int64_t dx = q.x - p.x, dy = q.y - p.y;
      return Edge{dx, dy, p.x, p.y, is_top_left(dx, dy) ? 0 : 1};
    };
    // Weight of each vertex is the edge function of the opposite edge.
    const Edge e_bc = make_edge(b, c);
    const Edge e_ca = make_edge(c, a);
    const Edge e_ab = make_edge(a, b);

    const bool flat = a.depth == b.depth && b.depth == c.depth;
    const double inv_area = 1.0 / static_cast<double>(area);
    const double abx = b.sx - a.sx, aby = b.sy - a.sy, acx = c.sx - a.sx, acy = c.sy - a.sy;
    const double exact_area = abx * acy - aby * acx;
    const bool exact = std::abs(exact_area) > 1e-9 * (std::abs(abx * acy) + std::abs(aby * acx));

    for (std::int64_t py = py0; py <= py1; ++py) {
      const std::int64_t sy = py * kSubpixel + half;
      std::int64_t sx = px0 * kSubpixel + half;
      std::int64_t wa = e_bc.at(sx, sy), wb = e_ca.at(sx, sy), wc = e_ab.at(sx, sy);
      const std::int64_t step_a = -e_bc.dy * kSubpixel;
      const std::int64_t step_b = -e_ca.dy * kSubpixel;
      const std::int64_t step_c = -e_ab.dy * kSubpixel;
      for (std::int64_t px = px0; px <= px1; ++px, wa += step_a, wb += step_b, wc += step_c) {
        if ((wa | wb | wc) < 0) continue;
        // Undo the fill-rule bias for interpolation weights.
        double lb = static_cast<double>(wb + e_ca.bias) * inv_area;
        double lc = static_cast<double>(wc + e_ab.bias) * inv_area;
        double inv_z = a.inv_depth + lb * (b.inv_depth - a.inv_depth) + lc * (c.inv_depth - a.inv_depth);
        if (exact && !flat) {
          const double dx = static_cast<double>(px) + 0.5 - a.sx, dy = static_cast<double>(py) + 0.5 - a.sy;
          const double eb = (dx * acy - dy * acx) / exact_area;
          const double ec = (abx * dy - aby * dx) / exact_area;
          const double iz = a.inv_depth + eb * (b.inv_depth - a.inv_depth) + ec * (c.inv_depth - a.inv_depth);
          if (iz > 0.0 && std::isfinite(iz)) {
            lb = eb;
            lc = ec;
            inv_z = iz;
          }
        }
        const double la = 1.0 - lb - lc;
        double depth = 1.0 / inv_z;
        if (flat) {
          depth = a.depth;
          inv_z = a.inv_depth;
        }
        if (!(depth > cam_.near_clip_m) || depth > cam_.far_clip_m) continue;
        const std::size_t idx = static_cast<std::size_t>(py) * cam_.width_px + static_cast<std::size_t>(px);
        if (!(depth < zbuf_[idx])) continue;
        zbuf_[idx] = depth;
        // perspective-correct attribute weights
        const double pa = la * a.inv_depth / inv_z;
        const double pb = lb * b.inv_depth / inv_z;
        const double pc = lc * c.inv_depth / inv_z;
        rgb_[idx] = shade(*a.attrs, *b.attrs, *c.attrs, pa, pb, pc);
      }
    }
  }

  Rgb8 shade(const ClipVertex& a, const ClipVertex& b, const ClipVertex& c, double wa, double wb,
             double wc) const {
    const Vec3 pos = wa * a.world + wb * b.world + wc * c.world;
    Vec3 n = wa * a.normal + wb * b.normal + wc * c.normal;
    const double nlen = n.norm();
    n = nlen > 0.0 ? Vec3(n / nlen) : Vec3::Zero();

    Vec3 albedo;
    if (textured_) {
      const Vec2 uv = wa * a.uv + wb * b.uv + wc * c.uv;
      for (int ch = 0; ch < 3; ++ch) albedo[ch] = bilinear_channel(*options_.texture, uv.x(), uv.y(), ch);
    } else {
      albedo = wa * a.albedo + wb * b.albedo + wc * c.albedo;
    }

    const Vec3 to_light = light_.position - pos;
    const double d2 = to_light.squaredNorm();
    double diffuse = 0.0;
    if (d2 > 0.0) diffuse = std::max(0.0, n.dot(to_light) / std::sqrt(d2)) * light_.intensity / d2;
    Rgb8 out;
    out.r = quantize(albedo[0] * (options_.ambient + diffuse * light_.color[0]));
    out.g = quantize(albedo[1] * (options_.ambient + diffuse * light_.color[1]));
    out.b = quantize(albedo[2] * (options_.ambient + diffuse * light_.color[2]));
    return out;
  }

  const CameraRig& cam_;
  Intrinsics intr_;
  const PointLight& light_;
  const RenderOptions& options_;
  bool textured_ = false;
  std::array<ClipPlane, 5> planes_;
  DepthMap zbuf_;
  RgbImage rgb_;
};

}  // namespace

void RenderOptions::validate() const {
  if (!(ambient >= 0.0) || !std::isfinite(ambient)) throw ConfigError("ambient must be >= 0");
  for (int i = 0; i < 3; ++i) {
    if (!(albedo[i] >= 0.0 && albedo[i] <= 1.0)) throw ConfigError("albedo must lie in [0,1]");
  }
}

std::size_t FramePacket::coverage() const {
  return static_cast<std::size_t>(std::count(mask.pixels().begin(), mask.pixels().end(), 1));
}

FramePacket rasterize(const TriMesh& mesh, const CameraRig& cam, const PointLight& light,
                      const RenderOptions& options) {
  cam.validate();
  light.validate();
  options.validate();
  if (mesh.triangles.empty()) throw GeometryError("cannot rasterize an empty mesh");
  mesh.validate();
  Rasterizer r(cam, light, options);
  r.draw(mesh);
  return std::move(r).finish();
}

RgbImage rescale_nearest(const RgbImage& image, int width, int height) {
  if (image.empty()) throw ConfigError("cannot rescale an empty image");
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(static_cast<int>((static_cast<std::int64_t>(y) * 2 + 1) * image.height() / (2LL * height)),
                            image.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(static_cast<int>((static_cast<std::int64_t>(x) * 2 + 1) * image.width() / (2LL * width)),
                              image.width() - 1);
      out.at(x, y) = image.at(sx, sy);
    }
  }
  return out;
}

FramePacket composite_background(FramePacket frame, const RgbImage& background, bool rescale) {
  const RgbImage* bg = &background;
  RgbImage resized;
  if (!background.same_shape(frame.rgb)) {
    if (!rescale) {
      throw ConfigError("background is " + std::to_string(background.width()) + "x" +
                        std::to_string(background.height()) + ", frame is " +
                        std::to_string(frame.rgb.width()) + "x" + std::to_string(frame.rgb.height()));
    }
    resized = rescale_nearest(background, frame.rgb.width(), frame.rgb.height());
    bg = &resized;
  }
  for (std::size_t i = 0; i < frame.rgb.size(); ++i) {
    if (!frame.mask[i]) {
      frame.rgb[i] = (*bg)[i];
      frame.depth[i] = kInvalidDepth;
    }
  }
  return frame;
}

FramePacket render_frame(const TriMesh& mesh, const SceneSample& sample, const CameraRig& cam,
                         const RgbImage& background, const RenderOptions& options) {
  const TriMesh posed = transform_mesh(apply_expression(mesh, sample.expression), sample.head_pose);
  FramePacket frame = rasterize(posed, cam, sample.light, options);
  frame = composite_background(std::move(frame), background, options.rescale_background);
  frame.meta.sample = sample;
  frame.meta.light_direction = light_direction(sample, sample.head_origin());
  return frame;
}

RgbImage colorize_depth(const DepthMap& depth) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double d : depth.pixels()) {
    if (d == kInvalidDepth || !std::isfinite(d)) continue;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  RgbImage out(depth.width(), depth.height());
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    if (d == kInvalidDepth || !std::isfinite(d)) continue;
    const auto g = static_cast<std::uint8_t>(255 - std::lround((d - lo) / span * 223.0));
    out[i] = {g, g, g};
  }
  return out;
}

}  // namespace facedepth
