#include "facedepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "facedepth/error.hpp"

namespace facedepth {
namespace {

void require_same_shape(const DepthMap& gt, const DepthMap& pred, const Mask* mask) {
  if (!gt.same_shape(pred) || (mask && !gt.same_shape(*mask))) {
    throw ShapeError("depth maps differ in shape: gt " + std::to_string(gt.width()) + "x" +
                     std::to_string(gt.height()) + ", pred " + std::to_string(pred.width()) + "x" +
                     std::to_string(pred.height()));
  }
}

bool usable(double d) { return std::isfinite(d) && d > 0.0; }

}  // namespace

std::string to_string(Alignment a) {
  switch (a) {
    case Alignment::kNone: return "none";
    case Alignment::kMedianScale: return "median-scale";
    case Alignment::kAffineInverseDepth: return "affine-inverse-depth";
  }
  return "none";
}

Alignment parse_alignment(const std::string& name) {
  if (name == "none") return Alignment::kNone;
  if (name == "median-scale") return Alignment::kMedianScale;
  if (name == "affine-inverse-depth") return Alignment::kAffineInverseDepth;
  throw ConfigError("unknown alignment '" + name + "'");
}

Mask valid_mask(const DepthMap& gt, const DepthMap& pred, const DepthRange& range) {
  require_same_shape(gt, pred, nullptr);
  Mask mask(gt.width(), gt.height(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double g = gt[i];
    const bool gt_ok = std::isfinite(g) && g > range.near_m && g <= range.far_m;
    mask[i] = gt_ok && usable(pred[i]) ? 1 : 0;
  }
  return mask;
}

MetricReport compute_metrics(const DepthMap& gt, const DepthMap& pred, const Mask& mask) {
  require_same_shape(gt, pred, &mask);
  const double t1 = 1.25, t2 = t1 * t1, t3 = t2 * t1;
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::int64_t n = 0, d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    const double g = gt[i];
    const double p = pred[i];
    if (!usable(g) || !usable(p)) {
      throw EvaluationError("masked pixel " + std::to_string(i) + " has non-positive depth");
    }
    const double err = p - g;
    abs_rel += std::abs(err) / g;
    sq_rel += err * err / g;
    sq += err * err;
    const double log_err = std::log(p) - std::log(g);
    sq_log += log_err * log_err;
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < t1;
    d2 += ratio < t2;
    d3 += ratio < t3;
    ++n;
  }
  if (n == 0) throw EvaluationError("no valid pixels to evaluate");
  const double inv_n = 1.0 / static_cast<double>(n);
  MetricReport r;
  r.abs_rel = abs_rel * inv_n;
  r.sq_rel = sq_rel * inv_n;
  r.rmse = std::sqrt(sq * inv_n);
  r.rmse_log = std::sqrt(sq_log * inv_n);
  // Divide rather than multiply so that d == n gives exactly 1.
  r.delta1 = static_cast<double>(d1) / static_cast<double>(n);
  r.delta2 = static_cast<double>(d2) / static_cast<double>(n);
  r.delta3 = static_cast<double>(d3) / static_cast<double>(n);
  r.valid_pixel_count = n;
  return r;
}

AlignedPrediction align_prediction(const DepthMap& gt, const DepthMap& pred, const Mask& mask,
                                   Alignment mode) {
  require_same_shape(gt, pred, &mask);
  AlignedPrediction out;
  if (mode == Alignment::kNone) {
    out.depth = pred;
    return out;
  }

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    if (!usable(gt[i]) || !std::isfinite(pred[i])) {
      throw AlignmentError("masked pixel " + std::to_string(i) + " is not alignable");
    }
    idx.push_back(i);
  }
  if (idx.empty()) throw AlignmentError("alignment mask is empty");

  out.depth = DepthMap(pred.width(), pred.height(), kInvalidDepth);
  if (mode == Alignment::kMedianScale) {
    std::vector<double> ratios;
    ratios.reserve(idx.size());
    for (auto i : idx) {
      if (!(pred[i] > 0.0)) throw AlignmentError("median scaling needs positive predictions");
      ratios.push_back(gt[i] / pred[i]);
    }
    const std::size_t mid = ratios.size() / 2;
    std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(mid), ratios.end());
    double median = ratios[mid];
    if (ratios.size() % 2 == 0) {
      const double lower = *std::max_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(mid));
      median = 0.5 * (lower + median);
    }
    out.scale = median;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (usable(pred[i])) out.depth[i] = pred[i] * median;
    }
    return out;
  }

  // Centered least squares for t = a * p + b with t = 1 / gt.
  double mean_p = 0.0, mean_t = 0.0;
  for (auto i : idx) {
    mean_p += pred[i];
    mean_t += 1.0 / gt[i];
  }
  mean_p /= static_cast<double>(idx.size());
  mean_t /= static_cast<double>(idx.size());
  double var_p = 0.0, cov = 0.0, scale_p = 0.0;
  for (auto i : idx) {
    const double dp = pred[i] - mean_p;
    var_p += dp * dp;
    cov += dp * (1.0 / gt[i] - mean_t);
    scale_p = std::max(scale_p, std::abs(pred[i]));
  }
  if (!(var_p > 1e-24 * std::max(1.0, scale_p * scale_p) * static_cast<double>(idx.size()))) {
    throw AlignmentError("prediction is constant over the mask; affine fit is degenerate");
  }
  out.scale = cov / var_p;
  out.shift = mean_t - out.scale * mean_p;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i])) continue;
    const double inv = out.scale * pred[i] + out.shift;
    if (inv > 0.0 && std::isfinite(1.0 / inv)) out.depth[i] = 1.0 / inv;
  }
  return out;
}

MetricReport aggregate_report(std::span<const MetricReport> reports, Aggregation mode) {
  if (reports.empty()) throw EvaluationError("cannot aggregate an empty report list");
  if (reports.size() == 1) return reports.front();
  double total = 0.0;
  std::int64_t pixels = 0;
  MetricReport out;
  double sq = 0.0, sq_log = 0.0;
  // Pixel-weighted deltas pool integer hit counts.
  auto hits = [](double fraction, std::int64_t n) {
    return std::round(fraction * static_cast<double>(n));
  };
  const bool pooled = mode == Aggregation::kPixelWeighted;
  for (const auto& r : reports) {
    if (r.valid_pixel_count < 1) throw EvaluationError("report without valid pixels");
    const double w = mode == Aggregation::kPixelWeighted ? static_cast<double>(r.valid_pixel_count) : 1.0;
    total += w;
    pixels += r.valid_pixel_count;
    out.abs_rel += w * r.abs_rel;
    out.sq_rel += w * r.sq_rel;
    sq += w * r.rmse * r.rmse;
    sq_log += w * r.rmse_log * r.rmse_log;
    out.delta1 += pooled ? hits(r.delta1, r.valid_pixel_count) : r.delta1;
    out.delta2 += pooled ? hits(r.delta2, r.valid_pixel_count) : r.delta2;
    out.delta3 += pooled ? hits(r.delta3, r.valid_pixel_count) : r.delta3;
  }
  out.abs_rel /= total;
  out.sq_rel /= total;
  out.rmse = std::sqrt(sq / total);
  out.rmse_log = std::sqrt(sq_log / total);
  out.delta1 /= total;
  out.delta2 /= total;
  out.delta3 /= total;
  out.valid_pixel_count = pixels;
  out.alignment = reports.front().alignment;
  return out;
}

std::string format_report(const MetricReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.4f %.4f %.4f %.4f %.4f %.4f %.4f", r.abs_rel, r.sq_rel, r.rmse,
                r.rmse_log, r.delta1, r.delta2, r.delta3);
  return buf;
}

std::string format_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t name_width = 6;
  for (const auto& [name, report] : rows) name_width = std::max(name_width, name.size());
  const int w = static_cast<int>(name_width);
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-4s %-*s %-8s %-8s %-8s %-8s %-8s %-8s %s\n", "No.", w, "Method", "AbsRel",
                "SqRel", "RMSE", "RMSElog", "d<1.25", "d<1.25^2", "d<1.25^3");
  out += buf;
  int n = 1;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-4s %-*s %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f %-8.4f %.4f\n",
                  (std::to_string(n++) + ".").c_str(), w, name.c_str(), r.abs_rel, r.sq_rel, r.rmse,
                  r.rmse_log, r.delta1, r.delta2, r.delta3);
    out += buf;
  }
  return out;
}

nlohmann::json to_json(const MetricReport& r) {
  return {{"abs_rel", r.abs_rel},   {"sq_rel", r.sq_rel}, {"rmse", r.rmse},
          {"rmse_log", r.rmse_log}, {"delta1", r.delta1}, {"delta2", r.delta2},
          {"delta3", r.delta3},     {"valid_pixels", r.valid_pixel_count},
          {"alignment", to_string(r.alignment)}};
}

}  // namespace facedepth
