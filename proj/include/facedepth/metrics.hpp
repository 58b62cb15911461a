#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facedepth/image.hpp"

namespace facedepth {

enum class Alignment { kNone, kMedianScale, kAffineInverseDepth };

std::string to_string(Alignment a);
/// Accepts "none", "median-scale", "affine-inverse-depth".
Alignment parse_alignment(const std::string& name);

/// Standard monocular depth error statistics over a set of valid pixels.
struct MetricReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::int64_t valid_pixel_count = 0;
  Alignment alignment = Alignment::kNone;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Ground-truth depths outside (near, far] are treated as missing.
struct DepthRange {
  double near_m = 0.01;
  double far_m = 5.0;
};

/// True where gt lies in (near, far] and pred is finite and positive.
Mask valid_mask(const DepthMap& gt, const DepthMap& pred, const DepthRange& range = {});

/// AbsRel = mean|p-g|/g, SqRel = mean (p-g)^2/g, RMSE = sqrt mean (p-g)^2,
/// RMSElog = sqrt mean (ln p - ln g)^2, delta_k = fraction with
/// max(p/g, g/p) < 1.25^k (strict). Natural log throughout.
MetricReport compute_metrics(const DepthMap& gt, const DepthMap& pred, const Mask& mask);

struct AlignedPrediction {
  DepthMap depth;
  /// median-scale: depth = scale * pred. affine: depth = 1 / (scale * pred + shift).
  double scale = 1.0;
  double shift = 0.0;
};

/// Normalizes a relative-depth prediction against ground truth over `mask`.
/// kAffineInverseDepth treats `pred` as inverse depth and fits (a, b) by least
/// squares to 1/gt; pixels whose aligned inverse depth is not positive become
/// invalid. Throws AlignmentError when the fit is degenerate.
AlignedPrediction align_prediction(const DepthMap& gt, const DepthMap& pred, const Mask& mask,
                                   Alignment mode);

enum class Aggregation { kPixelWeighted, kFrameAveraged };

/// kPixelWeighted pools as if the metrics were computed over the union of all
/// pixels (RMSE-type fields pool their squares). kFrameAveraged gives every
/// report equal weight.
MetricReport aggregate_report(std::span<const MetricReport> reports,
                              Aggregation mode = Aggregation::kPixelWeighted);

/// The seven statistics in table column order with four decimals, single-space separated.
std::string format_report(const MetricReport& report);

/// Header plus one numbered row per (method, report).
std::string format_table(const std::vector<std::pair<std::string, MetricReport>>& rows);

nlohmann::json to_json(const MetricReport& report);

}  // namespace facedepth
