#include "facedepth/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "facedepth/dataset.hpp"
#include "facedepth/error.hpp"
#include "facedepth/png_io.hpp"
#include "facedepth/version.hpp"

namespace facedepth {
namespace {

// Anything that goes wrong before output is produced is a usage/config failure.
template <typename F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw ConfigError(e.what());
  }
}

SceneAssets prepare(const RunConfig& config) {
  return as_config_error([&] {
    config.validate();
    SceneAssets assets = load_assets(config);
    // Surface sampling problems (e.g. bad ranges) before any output exists.
    sample_scene(config.sweep, 0, config.seed, config.camera);
    return assets;
  });
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}

std::optional<std::filesystem::path> find_prediction(const std::filesystem::path& dir,
                                                     const std::map<std::int64_t, FrameRecord>& pred_records,
                                                     std::int64_t frame) {
  if (!pred_records.empty()) {
    const auto it = pred_records.find(frame);
    if (it == pred_records.end()) return std::nullopt;
    return dir / it->second.depth_path;
  }
  const std::string stem = frame_stem(frame);
  for (const auto& candidate : {dir / (stem + ".f32"), dir / (stem + ".png"), dir / "depth" / (stem + ".f32"),
                                dir / "depth" / (stem + ".png")}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

DepthMap load_depth(const std::filesystem::path& path, double scale) {
  if (path.extension() == ".f32") return read_depth_f32(path);
  return decode_depth16(read_png_gray16(path), DepthEncoding{scale});
}

}  // namespace

FramePacket render_sweep_frame(const RunConfig& config, const SceneAssets& assets, std::int64_t frame_index) {
  const SceneSample sample = sample_scene(config.sweep, frame_index, config.seed, config.camera);
  RenderOptions options = config.shading;
  options.texture = assets.texture;
  return render_frame(assets.mesh, sample, config.camera, assets.background, options);
}

RenderSummary run_render(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const SceneAssets assets = prepare(config);

  ManifestHeader header;
  header.generator = std::string("facedepth ") + kVersion;
  header.global_seed = config.seed;
  header.encoding = config.encoding;
  header.camera = config.camera;
  header.config = to_json(config);
  DatasetWriter writer(config.output_dir, header, DatasetWriter::Options{config.float_sidecar});

  const std::int64_t total = config.frame_count;
  std::vector<std::int64_t> coverage(static_cast<std::size_t>(total), 0);
  std::atomic<std::int64_t> next{0};
  std::atomic<std::int64_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex mutex;
  std::int64_t failed_frame = -1;
  std::string failure;

  auto worker = [&] {
    while (!failed.load()) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        const FramePacket frame = render_sweep_frame(config, assets, i);
        writer.add(frame);
        coverage[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(frame.coverage());
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        if (!failed.exchange(true)) {
          failed_frame = i;
          failure = e.what();
        }
        return;
      }
      const std::int64_t n = done.fetch_add(1) + 1;
      if (n == total || n % std::max<std::int64_t>(1, total / 10) == 0) {
        std::lock_guard lock(mutex);
        log << "rendered " << n << "/" << total << " frames\n";
      }
    }
  };

  const int workers = static_cast<int>(std::min<std::int64_t>(config.workers, total));
  {
    std::vector<std::jthread> threads;
    for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
    worker();
  }
  writer.finish();
  if (failed) {
    throw Error("frame " + std::to_string(failed_frame) + " failed: " + failure);
  }

  RenderSummary s;
  s.frames = total;
  s.min_valid_pixels = *std::min_element(coverage.begin(), coverage.end());
  s.max_valid_pixels = *std::max_element(coverage.begin(), coverage.end());
  double sum = 0.0;
  for (auto c : coverage) sum += static_cast<double>(c);
  s.mean_valid_pixels = sum / static_cast<double>(total);
  s.wall_time = std::chrono::steady_clock::now() - start;
  return s;
}

EvalResult run_eval(const EvalOptions& options, std::ostream& log) {
  const auto gt_manifest_path = options.gt_dir / kManifestName;
  if (!std::filesystem::exists(gt_manifest_path)) {
    throw ConfigError("ground-truth directory '" + options.gt_dir.string() + "' has no " + kManifestName);
  }
  if (!std::filesystem::is_directory(options.pred_dir)) {
    throw ConfigError("prediction directory '" + options.pred_dir.string() + "' does not exist");
  }
  const Manifest gt = as_config_error([&] { return read_manifest(gt_manifest_path); });

  std::map<std::int64_t, FrameRecord> pred_records;
  double pred_scale = options.pred_scale.value_or(gt.header.encoding.scale);
  if (const auto p = options.pred_dir / kManifestName; std::filesystem::exists(p)) {
    const Manifest pm = as_config_error([&] { return read_manifest(p); });
    if (!options.pred_scale) pred_scale = pm.header.encoding.scale;
    for (const auto& r : pm.records) pred_records.emplace(r.frame_index, r);
  }

  std::vector<std::pair<const FrameRecord*, std::filesystem::path>> matched;
  std::vector<std::int64_t> missing;
  for (const auto& r : gt.records) {
    if (auto p = find_prediction(options.pred_dir, pred_records, r.frame_index)) {
      matched.emplace_back(&r, *p);
    } else {
      missing.push_back(r.frame_index);
    }
  }
  if (matched.empty()) throw ConfigError("no prediction matches any ground-truth frame");
  if (!missing.empty() && !options.skip_missing) {
    throw ConfigError("predictions missing for frames " + join(missing) + " (use --skip-missing to ignore)");
  }

  EvalResult result;
  result.skipped = missing;
  const DepthRange range{gt.header.camera.near_clip_m, gt.header.camera.far_clip_m};
  std::vector<std::int64_t> unreadable;
  for (const auto& [record, pred_path] : matched) {
    DepthMap pred;
    try {
      pred = load_depth(pred_path, pred_scale);
    } catch (const Error& e) {
      if (!options.skip_missing) {
        throw IoError("frame " + std::to_string(record->frame_index) + ": " + e.what());
      }
      log << "skipping frame " << record->frame_index << ": " << e.what() << "\n";
      unreadable.push_back(record->frame_index);
      continue;
    }
    const DepthMap gt_depth = load_depth(options.gt_dir / record->depth_path, gt.header.encoding.scale);
    const Mask mask = valid_mask(gt_depth, pred, range);
    if (std::count(mask.pixels().begin(), mask.pixels().end(), 1) == 0) {
      log << "frame " << record->frame_index << " has no valid pixels; excluded\n";
      continue;
    }
    const AlignedPrediction aligned = align_prediction(gt_depth, pred, mask, options.alignment);
    const Mask aligned_mask = valid_mask(gt_depth, aligned.depth, range);
    MetricReport report = compute_metrics(gt_depth, aligned.depth, aligned_mask);
    report.alignment = options.alignment;
    result.frames.push_back({record->frame_index, report});
  }
  if (!unreadable.empty()) {
    log << "skipped unreadable predictions for frames " << join(unreadable) << "\n";
    result.skipped.insert(result.skipped.end(), unreadable.begin(), unreadable.end());
    std::sort(result.skipped.begin(), result.skipped.end());
  }
  if (result.frames.empty()) throw EvaluationError("no frame could be evaluated");

  std::vector<MetricReport> reports;
  for (const auto& f : result.frames) reports.push_back(f.report);
  result.aggregate = aggregate_report(reports, options.aggregation);

  const std::string table = format_table({{options.method, result.aggregate}});
  if (!options.table_path.empty()) {
    std::ofstream t(options.table_path);
    t << table;
    if (!t) throw IoError("cannot write table to '" + options.table_path.string() + "'");
  }
  if (!options.report_path.empty()) {
    nlohmann::json j;
    j["method"] = options.method;
    j["alignment"] = to_string(options.alignment);
    j["aggregation"] = options.aggregation == Aggregation::kPixelWeighted ? "pixel-weighted" : "frame-averaged";
    j["aggregate"] = to_json(result.aggregate);
    j["frames"] = nlohmann::json::array();
    for (const auto& f : result.frames) {
      nlohmann::json fj = to_json(f.report);
      fj["frame"] = f.frame_index;
      j["frames"].push_back(fj);
    }
    j["skipped"] = result.skipped;
    std::ofstream r(options.report_path);
    r << j.dump(2) << '\n';
    if (!r) throw IoError("cannot write report to '" + options.report_path.string() + "'");
  }
  return result;
}

PreviewPaths run_preview(const RunConfig& config, std::int64_t frame_index, const std::filesystem::path& out_dir,
                         std::ostream& log) {
  const SceneAssets assets = prepare(config);
  if (frame_index < 0) throw ConfigError("frame index must be non-negative");
  const FramePacket frame = render_sweep_frame(config, assets, frame_index);

  std::filesystem::create_directories(out_dir);
  const std::string stem = "preview_" + frame_stem(frame_index);
  PreviewPaths paths{out_dir / (stem + "_rgb.png"), out_dir / (stem + "_depth.png"),
                     out_dir / (stem + "_depth_color.png")};
  write_png_rgb8(paths.rgb, frame.rgb);
  write_png_gray16(paths.depth, encode_depth16(frame.depth, config.encoding));
  write_png_rgb8(paths.depth_color, colorize_depth(frame.depth));
  log << "preview of frame " << frame_index << " written to " << out_dir.string() << "\n";
  return paths;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic facial RGB-D dataset generator and depth evaluation tool", "facedepth"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::int64_t frames = 0;
  std::uint64_t seed = 0;
  int workers = 0;
  bool float_sidecar = false;

  auto* render = app.add_subcommand("render", "Render a dataset sweep described by a config file");
  render->add_option("config", config_path, "INI config file")->required();
  render->add_option("--set", overrides, "Override a config value: section.key=value (repeatable)");
  render->add_option("--out", out_dir, "Output directory (output.dir)");
  render->add_option("--frames", frames, "Number of frames (sweep.frame_count)");
  render->add_option("--seed", seed, "Global seed (sweep.seed)");
  render->add_option("--workers", workers, "Worker threads (output.workers)");
  render->add_flag("--float-sidecar", float_sidecar, "Also write float32 depth (depth.float_sidecar)");

  EvalOptions eval_opts;
  std::string align = "none";
  std::string aggregate = "pixel";
  double pred_scale = 0.0;
  auto* eval = app.add_subcommand("eval", "Score predicted depth maps against a generated dataset");
  eval->add_option("gt_dir", eval_opts.gt_dir, "Ground-truth dataset directory")->required();
  eval->add_option("pred_dir", eval_opts.pred_dir, "Prediction directory")->required();
  eval->add_option("--align", align, "none | median-scale | affine-inverse-depth")
      ->check(CLI::IsMember({"none", "median-scale", "affine-inverse-depth"}));
  eval->add_option("--aggregate", aggregate, "pixel | frame")->check(CLI::IsMember({"pixel", "frame"}));
  eval->add_option("--report", eval_opts.report_path, "Write the JSON report here");
  eval->add_option("--table", eval_opts.table_path, "Write the text table here");
  eval->add_option("--pred-scale", pred_scale, "Units per meter of 16-bit predictions");
  eval->add_option("--method", eval_opts.method, "Row label in the table");
  eval->add_flag("--skip-missing", eval_opts.skip_missing, "Skip frames without a readable prediction");

  std::int64_t preview_frame = 0;
  std::string preview_out;
  auto* preview = app.add_subcommand("preview", "Render one frame with a colorized depth still");
  preview->add_option("config", config_path, "INI config file")->required();
  preview->add_option("--frame", preview_frame, "Frame index")->check(CLI::NonNegativeNumber);
  preview->add_option("--out", preview_out, "Directory for the preview images (default: <output.dir>/preview)");
  preview->add_option("--set", overrides, "Override a config value: section.key=value (repeatable)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (render->parsed()) {
      if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
      if (render->count("--frames")) overrides.push_back("sweep.frame_count=" + std::to_string(frames));
      if (render->count("--seed")) overrides.push_back("sweep.seed=" + std::to_string(seed));
      if (render->count("--workers")) overrides.push_back("output.workers=" + std::to_string(workers));
      if (float_sidecar) overrides.push_back("depth.float_sidecar=true");
      const RunConfig config = load_run_config(config_path, overrides);
      const RenderSummary s = run_render(config, err);
      err << "frames: " << s.frames << "\nvalid pixels per frame: min " << s.min_valid_pixels << ", mean "
          << s.mean_valid_pixels << ", max " << s.max_valid_pixels << "\nwall time: " << s.wall_time.count()
          << " s\noutput: " << config.output_dir.string() << "\n";
      return kExitOk;
    }
    if (eval->parsed()) {
      eval_opts.alignment = parse_alignment(align);
      eval_opts.aggregation = aggregate == "frame" ? Aggregation::kFrameAveraged : Aggregation::kPixelWeighted;
      if (eval->count("--pred-scale")) eval_opts.pred_scale = pred_scale;
      const EvalResult r = run_eval(eval_opts, err);
      out << format_table({{eval_opts.method, r.aggregate}});
      err << "evaluated " << r.frames.size() << " frames";
      if (!r.skipped.empty()) err << ", skipped " << join(r.skipped);
      err << "\n";
      return kExitOk;
    }
    if (preview->parsed()) {
      const RunConfig config = load_run_config(config_path, overrides);
      const std::filesystem::path dir = preview_out.empty() ? config.output_dir / "preview" : std::filesystem::path(preview_out);
      run_preview(config, preview_frame, dir, err);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace facedepth
