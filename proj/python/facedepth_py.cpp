#include <algorithm>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "facedepth/cli.hpp"
#include "facedepth/config.hpp"
#include "facedepth/dataset.hpp"
#include "facedepth/depth_codec.hpp"
#include "facedepth/error.hpp"
#include "facedepth/metrics.hpp"
#include "facedepth/procedural.hpp"
#include "facedepth/render.hpp"
#include "facedepth/scene.hpp"
#include "facedepth/version.hpp"

namespace py = pybind11;
using namespace facedepth;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename T>
Plane<T> to_plane(const Array<T>& a, const char* name) {
  if (a.ndim() != 2) throw ShapeError(std::string(name) + " must be a 2-D array");
  Plane<T> p(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), p.pixels().begin());
  return p;
}

template <typename T>
py::array_t<T> to_array(const Plane<T>& p) {
  py::array_t<T> a({p.height(), p.width()});
  std::copy(p.pixels().begin(), p.pixels().end(), a.mutable_data());
  return a;
}

py::array_t<std::uint8_t> rgb_array(const RgbImage& img) {
  py::array_t<std::uint8_t> a({img.height(), img.width(), 3});
  auto* out = a.mutable_data();
  for (const auto& p : img.pixels()) {
    *out++ = p.r;
    *out++ = p.g;
    *out++ = p.b;
  }
  return a;
}

RgbImage rgb_image(const Array<std::uint8_t>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ShapeError("image must have shape (height, width, 3)");
  RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const auto* in = a.data();
  for (auto& p : img.pixels()) {
    p = {in[0], in[1], in[2]};
    in += 3;
  }
  return img;
}

Mask mask_or_valid(const DepthMap& gt, const DepthMap& pred, const std::optional<Array<bool>>& mask) {
  if (!mask) return valid_mask(gt, pred);
  if (mask->ndim() != 2) throw ShapeError("mask must be a 2-D array");
  Mask out(static_cast<int>(mask->shape(1)), static_cast<int>(mask->shape(0)));
  std::transform(mask->data(), mask->data() + mask->size(), out.pixels().begin(),
                 [](bool v) { return static_cast<std::uint8_t>(v ? 1 : 0); });
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["abs_rel"] = r.abs_rel;
  d["sq_rel"] = r.sq_rel;
  d["rmse"] = r.rmse;
  d["rmse_log"] = r.rmse_log;
  d["delta1"] = r.delta1;
  d["delta2"] = r.delta2;
  d["delta3"] = r.delta3;
  d["valid_pixel_count"] = r.valid_pixel_count;
  d["alignment"] = to_string(r.alignment);
  return d;
}

MetricReport report_from(const py::dict& d) {
  MetricReport r;
  r.abs_rel = d["abs_rel"].cast<double>();
  r.sq_rel = d["sq_rel"].cast<double>();
  r.rmse = d["rmse"].cast<double>();
  r.rmse_log = d["rmse_log"].cast<double>();
  r.delta1 = d["delta1"].cast<double>();
  r.delta2 = d["delta2"].cast<double>();
  r.delta3 = d["delta3"].cast<double>();
  if (d.contains("valid_pixel_count")) r.valid_pixel_count = d["valid_pixel_count"].cast<std::int64_t>();
  return r;
}

py::dict frame_dict(const FramePacket& f) {
  py::dict d;
  d["rgb"] = rgb_array(f.rgb);
  d["depth"] = to_array(f.depth);
  py::array_t<bool> mask({f.mask.height(), f.mask.width()});
  std::transform(f.mask.pixels().begin(), f.mask.pixels().end(), mask.mutable_data(), [](auto v) { return v != 0; });
  d["mask"] = mask;
  return d;
}

}  // namespace

PYBIND11_MODULE(_facedepth, m) {
  m.doc() = "Synthetic facial RGB-D rendering and depth evaluation";
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  static py::exception<GeometryError> geometry_error(m, "GeometryError", base.ptr());
  static py::exception<EncodingError> encoding_error(m, "EncodingError", base.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
  static py::exception<IoError> io_error(m, "IoError", base.ptr());
  static py::exception<ShapeError> shape_error(m, "ShapeError", base.ptr());
  static py::exception<EvaluationError> evaluation_error(m, "EvaluationError", base.ptr());
  static py::exception<AlignmentError> alignment_error(m, "AlignmentError", evaluation_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const GeometryError& e) {
      py::set_error(geometry_error, e.what());
    } catch (const EncodingError& e) {
      py::set_error(encoding_error, e.what());
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const IoError& e) {
      py::set_error(io_error, e.what());
    } catch (const ShapeError& e) {
      py::set_error(shape_error, e.what());
    } catch (const AlignmentError& e) {
      py::set_error(alignment_error, e.what());
    } catch (const EvaluationError& e) {
      py::set_error(evaluation_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<TriMesh>(m, "TriMesh")
      .def_property_readonly("vertices",
                             [](const TriMesh& t) {
                               py::array_t<double> a({static_cast<py::ssize_t>(t.vertices.size()), py::ssize_t{3}});
                               auto* out = a.mutable_data();
                               for (const auto& v : t.vertices) out = std::copy(v.data(), v.data() + 3, out);
                               return a;
                             })
      .def_property_readonly("triangles",
                             [](const TriMesh& t) {
                               py::array_t<std::uint32_t> a({static_cast<py::ssize_t>(t.triangles.size()), py::ssize_t{3}});
                               auto* out = a.mutable_data();
                               for (const auto& f : t.triangles) out = std::copy(f.begin(), f.end(), out);
                               return a;
                             })
      .def_property_readonly("morph_names",
                             [](const TriMesh& t) {
                               std::vector<std::string> names;
                               for (const auto& [name, _] : t.morphs) names.push_back(name);
                               return names;
                             })
      .def("__repr__", [](const TriMesh& t) {
        return "<TriMesh " + std::to_string(t.vertices.size()) + " vertices, " + std::to_string(t.triangles.size()) +
               " triangles>";
      });

  m.def("parse_obj", [](const std::string& text) { return parse_obj(text); }, py::arg("text"));
  m.def("load_obj", &load_obj, py::arg("path"));
  m.def("serialize_obj", &serialize_obj, py::arg("mesh"));
  m.def("attach_morphs", &attach_morphs, py::arg("mesh"), py::arg("manifest"));
  m.def(
      "apply_expression",
      [](const TriMesh& mesh, const std::map<std::string, double>& weights) {
        return apply_expression(mesh, ExpressionWeights{weights});
      },
      py::arg("mesh"), py::arg("weights"));
  m.def(
      "transform_mesh",
      [](const TriMesh& mesh, double yaw, double pitch, double roll, const Vec3& t) {
        return transform_mesh(mesh, RigidTransform::from_euler_deg(yaw, pitch, roll, t));
      },
      py::arg("mesh"), py::arg("yaw_deg") = 0.0, py::arg("pitch_deg") = 0.0, py::arg("roll_deg") = 0.0,
      py::arg("translation") = Vec3::Zero());
  m.def("make_demo_head", &make_demo_head, py::arg("stacks") = 72, py::arg("slices") = 96);
  m.def("make_uv_sphere", &make_uv_sphere, py::arg("center"), py::arg("radius"), py::arg("stacks"),
        py::arg("slices"));
  m.def("make_quad", &make_quad, py::arg("z"), py::arg("half_width"), py::arg("half_height"));

  py::class_<CameraRig>(m, "CameraRig")
      .def(py::init<>())
      .def_readwrite("focal_length_mm", &CameraRig::focal_length_mm)
      .def_readwrite("sensor_width_mm", &CameraRig::sensor_width_mm)
      .def_readwrite("width_px", &CameraRig::width_px)
      .def_readwrite("height_px", &CameraRig::height_px)
      .def_readwrite("near_clip_m", &CameraRig::near_clip_m)
      .def_readwrite("far_clip_m", &CameraRig::far_clip_m)
      .def("validate", &CameraRig::validate);

  m.def(
      "intrinsics",
      [](const CameraRig& cam) {
        const auto k = intrinsics(cam);
        return py::make_tuple(k.fx, k.fy, k.cx, k.cy);
      },
      py::arg("camera") = CameraRig{}, "Returns (fx, fy, cx, cy) in pixels.");
  m.def(
      "project",
      [](const CameraRig& cam, const Vec3& p) -> std::optional<py::tuple> {
        const auto r = project(cam, p, intrinsics(cam));
        if (!r) return std::nullopt;
        return py::make_tuple(r->u, r->v, r->z);
      },
      py::arg("camera"), py::arg("point"), "Returns (u, v, z) or None behind the camera.");

  m.def(
      "sample_scene",
      [](std::int64_t frame_index, std::uint64_t seed) {
        const SceneSample s = sample_scene(SweepConfig{}, frame_index, seed);
        py::dict d;
        d["camera_distance"] = s.camera_distance;
        d["yaw_deg"] = s.yaw_deg;
        d["pitch_deg"] = s.pitch_deg;
        d["roll_deg"] = s.roll_deg;
        d["expression"] = s.expression_name;
        d["light_position"] = py::make_tuple(s.light.position.x(), s.light.position.y(), s.light.position.z());
        d["seed"] = s.seed;
        return d;
      },
      py::arg("frame_index"), py::arg("seed") = 42, "Draws one frame with the default sweep ranges.");

  m.def(
      "rasterize",
      [](const TriMesh& mesh, const CameraRig& cam, const Vec3& light_position, double light_intensity,
         double ambient) {
        PointLight light;
        light.position = light_position;
        light.intensity = light_intensity;
        RenderOptions options;
        options.ambient = ambient;
        return frame_dict(rasterize(mesh, cam, light, options));
      },
      py::arg("mesh"), py::arg("camera") = CameraRig{}, py::arg("light_position") = Vec3(0.2, 0.3, 0.0),
      py::arg("light_intensity") = 0.85, py::arg("ambient") = 0.15,
      "Renders a world-space mesh. Returns a dict with rgb, depth and mask arrays.");
  m.def(
      "render_frame",
      [](const TriMesh& mesh, std::int64_t frame_index, std::uint64_t seed, const CameraRig& cam,
         const std::optional<Array<std::uint8_t>>& background) {
        const SceneSample s = sample_scene(SweepConfig{}, frame_index, seed, cam);
        const RgbImage bg = background ? rgb_image(*background) : RgbImage(cam.width_px, cam.height_px, {40, 40, 48});
        py::dict d = frame_dict(render_frame(mesh, s, cam, bg));
        d["expression"] = s.expression_name;
        d["camera_distance"] = s.camera_distance;
        return d;
      },
      py::arg("mesh"), py::arg("frame_index"), py::arg("seed") = 42, py::arg("camera") = CameraRig{},
      py::arg("background") = py::none());
  m.def(
      "colorize_depth", [](const Array<double>& depth) { return rgb_array(colorize_depth(to_plane(depth, "depth"))); },
      py::arg("depth"));

  m.def(
      "encode_depth16",
      [](const Array<double>& depth, double scale) { return to_array(encode_depth16(to_plane(depth, "depth"), {scale})); },
      py::arg("depth"), py::arg("scale") = 10000.0);
  m.def(
      "decode_depth16",
      [](const Array<std::uint16_t>& img, double scale) {
        return to_array(decode_depth16(to_plane(img, "image"), {scale}));
      },
      py::arg("image"), py::arg("scale") = 10000.0);

  m.def(
      "valid_mask",
      [](const Array<double>& gt, const Array<double>& pred, double near, double far) {
        const Mask mk = valid_mask(to_plane(gt, "gt"), to_plane(pred, "pred"), {near, far});
        py::array_t<bool> out({mk.height(), mk.width()});
        std::transform(mk.pixels().begin(), mk.pixels().end(), out.mutable_data(), [](auto v) { return v != 0; });
        return out;
      },
      py::arg("gt"), py::arg("pred"), py::arg("near") = 0.01, py::arg("far") = 5.0);
  m.def(
      "compute_metrics",
      [](const Array<double>& gt_a, const Array<double>& pred_a, const std::optional<Array<bool>>& mask) {
        const DepthMap gt = to_plane(gt_a, "gt"), pred = to_plane(pred_a, "pred");
        return report_dict(compute_metrics(gt, pred, mask_or_valid(gt, pred, mask)));
      },
      py::arg("gt"), py::arg("pred"), py::arg("mask") = py::none(),
      "AbsRel, SqRel, RMSE, RMSElog and the three delta accuracies. Without a mask the standard validity mask is used.");
  m.def(
      "align_prediction",
      [](const Array<double>& gt_a, const Array<double>& pred_a, const std::string& mode,
         const std::optional<Array<bool>>& mask) {
        const DepthMap gt = to_plane(gt_a, "gt"), pred = to_plane(pred_a, "pred");
        const auto a = align_prediction(gt, pred, mask_or_valid(gt, pred, mask), parse_alignment(mode));
        return py::make_tuple(to_array(a.depth), a.scale, a.shift);
      },
      py::arg("gt"), py::arg("pred"), py::arg("mode"), py::arg("mask") = py::none(),
      "Returns (aligned_depth, scale, shift).");
  m.def(
      "aggregate_reports",
      [](const std::vector<py::dict>& reports, const std::string& mode) {
        std::vector<MetricReport> rs;
        for (const auto& d : reports) rs.push_back(report_from(d));
        if (mode != "pixel" && mode != "frame") throw ConfigError("mode must be 'pixel' or 'frame'");
        return report_dict(
            aggregate_report(rs, mode == "frame" ? Aggregation::kFrameAveraged : Aggregation::kPixelWeighted));
      },
      py::arg("reports"), py::arg("mode") = "pixel");
  m.def(
      "format_report", [](const py::dict& report) { return format_report(report_from(report)); }, py::arg("report"));

  m.def(
      "render_dataset",
      [](const std::filesystem::path& config, const std::vector<std::string>& overrides) {
        const RunConfig cfg = load_run_config(config, overrides);
        std::ostringstream log;
        RenderSummary s;
        {
          py::gil_scoped_release release;
          s = run_render(cfg, log);
        }
        py::dict d;
        d["frames"] = s.frames;
        d["min_valid_pixels"] = s.min_valid_pixels;
        d["max_valid_pixels"] = s.max_valid_pixels;
        d["mean_valid_pixels"] = s.mean_valid_pixels;
        d["wall_time"] = s.wall_time.count();
        d["output_dir"] = cfg.output_dir;
        return d;
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process. Returns (exit_code, stdout, stderr).");
}
