#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "facedepth/config.hpp"
#include "facedepth/metrics.hpp"

namespace facedepth {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

struct RenderSummary {
  std::int64_t frames = 0;
  std::int64_t min_valid_pixels = 0;
  std::int64_t max_valid_pixels = 0;
  double mean_valid_pixels = 0.0;
  std::chrono::duration<double> wall_time{};
};

/// Renders `config.frame_count` frames on `config.workers` threads into
/// `config.output_dir`. Assets are loaded and validated before the output
/// directory is touched. Output does not depend on the worker count.
RenderSummary run_render(const RunConfig& config, std::ostream& log);

struct EvalOptions {
  std::filesystem::path gt_dir;
  std::filesystem::path pred_dir;
  Alignment alignment = Alignment::kNone;
  Aggregation aggregation = Aggregation::kPixelWeighted;
  std::filesystem::path report_path;  // JSON; optional
  std::filesystem::path table_path;   // text table; optional
  bool skip_missing = false;
  /// Units per meter of 16-bit predictions without their own manifest.
  std::optional<double> pred_scale;
  std::string method = "prediction";
};

struct FrameScore {
  std::int64_t frame_index = 0;
  MetricReport report;
};

struct EvalResult {
  std::vector<FrameScore> frames;
  MetricReport aggregate;
  std::vector<std::int64_t> skipped;
};

EvalResult run_eval(const EvalOptions& options, std::ostream& log);

struct PreviewPaths {
  std::filesystem::path rgb;
  std::filesystem::path depth;
  std::filesystem::path depth_color;
};

/// Renders a single frame exactly as run_render would and writes its RGB,
/// 16-bit depth and colorized depth next to each other in `out_dir`.
PreviewPaths run_preview(const RunConfig& config, std::int64_t frame_index, const std::filesystem::path& out_dir,
                         std::ostream& log);

/// Renders one frame of a configured sweep (shared by render and preview).
FramePacket render_sweep_frame(const RunConfig& config, const SceneAssets& assets, std::int64_t frame_index);

/// Full command-line entry point: `render`, `eval`, `preview`.
/// `args` excludes the program name. Tables go to `out`, progress to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facedepth
