#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specvote/array_io.hpp"
#include "specvote/errors.hpp"

namespace specvote {

namespace detail {

inline void require_same_shape(int ah, int aw, int bh, int bw,
                               const char* what) {
  if (ah != bh || aw != bw)
    throw shape_error(std::string(what) + ": shapes " + std::to_string(ah) +
                      "x" + std::to_string(aw) + " and " + std::to_string(bh) +
                      "x" + std::to_string(bw) + " differ");
}

/// F-beta from confusion counts, computed through precision and recall so
/// that every caller shares one floating point path.
inline double f_beta_from_counts(std::int64_t tp, std::int64_t fp,
                                 std::int64_t fn, double beta2) {
  if (tp + fn == 0)
    throw undefined_recall_error(
        "F-measure is undefined against an empty ground truth mask");
  if (tp == 0) return 0.0;
  const double precision =
      static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return (1.0 + beta2) * precision * recall / (beta2 * precision + recall);
}

}  // namespace detail

/// Intersection over union. Two empty masks agree perfectly, so that
/// case is defined as 1.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
  detail::require_same_shape(a.height, a.width, b.height, b.width, "iou");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool pa = a.bits[i] != 0, pb = b.bits[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Fraction of pixels where the two masks agree.
inline double accuracy(const BinaryMask& pred, const BinaryMask& gt) {
  detail::require_same_shape(pred.height, pred.width, gt.height, gt.width,
                             "accuracy");
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i)
    agree += (pred.bits[i] != 0) == (gt.bits[i] != 0);
  return static_cast<double>(agree) / static_cast<double>(pred.bits.size());
}

/// F-measure with beta^2 = 0.3 by default. Zero true positives give 0;
/// an empty ground truth leaves recall undefined and throws.
inline double f_beta(const BinaryMask& pred, const BinaryMask& gt,
                     double beta2 = 0.3) {
  detail::require_same_shape(pred.height, pred.width, gt.height, gt.width,
                             "f_beta");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    const bool p = pred.bits[i] != 0, g = gt.bits[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  return detail::f_beta_from_counts(tp, fp, fn, beta2);
}

/// Round a probability in [0, 1] to an integer level in 0..255,
/// halves up.
inline int quantize255(double value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw data_error("soft mask value " + std::to_string(value) +
                     " outside [0, 1]");
  return static_cast<int>(std::floor(value * 255.0 + 0.5));
}

/// Maximum F-beta of the soft mask over the 255 binarizations
/// "level > t" for t in 0..254. One pass builds per-level histograms
/// split by ground truth, then suffix sums walk all thresholds, so this
/// is O(pixels + 256) rather than O(pixels * 255).
inline double max_f_beta(const SoftMask& soft, const BinaryMask& gt,
                         double beta2 = 0.3) {
  detail::require_same_shape(soft.height, soft.width, gt.height, gt.width,
                             "max_f_beta");
  std::int64_t gt_total = 0;
  std::int64_t hist_fg[256] = {0}, hist_bg[256] = {0};
  for (std::size_t i = 0; i < soft.values.size(); ++i) {
    const int level = quantize255(soft.values[i]);
    if (gt.bits[i] != 0) {
      ++hist_fg[level];
      ++gt_total;
    } else {
      ++hist_bg[level];
    }
  }
  if (gt_total == 0)
    throw undefined_recall_error(
        "F-measure is undefined against an empty ground truth mask");

  double best = 0.0;
  std::int64_t tp = hist_fg[255], fp = hist_bg[255];
  for (int t = 254; t >= 0; --t) {
    const double f =
        detail::f_beta_from_counts(tp, fp, gt_total - tp, beta2);
    if (f > best) best = f;
    tp += hist_fg[t];
    fp += hist_bg[t];
  }
  return best;
}

/// Best achievable IoU over a set of candidate masks, with the index of
/// the first candidate attaining it.
struct UpperBound {
  double iou = 0.0;
  std::size_t index = 0;
};

inline UpperBound upper_bound_iou(const std::vector<BinaryMask>& candidates,
                                  const BinaryMask& gt) {
  if (candidates.empty())
    throw parameter_error("upper bound needs at least one candidate mask");
  UpperBound result;
  result.iou = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double score = iou(candidates[i], gt);
    if (score > result.iou) {
      result.iou = score;
      result.index = i;
    }
  }
  return result;
}

/// Scores for one prediction / ground truth pair.
struct ImageEval {
  std::string name;
  double iou = 0.0;
  double accuracy = 0.0;
  double max_f_beta = 0.0;
};

/// Per-image rows plus unweighted means over them, in input order.
struct EvalReport {
  std::vector<ImageEval> rows;
  double mean_iou = 0.0;
  double mean_accuracy = 0.0;
  double mean_max_f_beta = 0.0;
};

inline EvalReport make_report(std::vector<ImageEval> rows) {
  if (rows.empty()) throw parameter_error("report needs at least one image");
  EvalReport report;
  report.rows = std::move(rows);
  double si = 0.0, sa = 0.0, sf = 0.0;
  for (const ImageEval& row : report.rows) {
    si += row.iou;
    sa += row.accuracy;
    sf += row.max_f_beta;
  }
  const double n = static_cast<double>(report.rows.size());
  report.mean_iou = si / n;
  report.mean_accuracy = sa / n;
  report.mean_max_f_beta = sf / n;
  return report;
}

/// Binarize a soft mask at a fixed exclusive threshold on the quantized
/// level, the same rule the threshold sweep uses.
inline BinaryMask binarize_level(const SoftMask& soft, int threshold) {
  if (threshold < 0 || threshold > 254)
    throw parameter_error("threshold must lie in 0..254");
  BinaryMask mask = BinaryMask::filled(soft.height, soft.width, false);
  for (std::size_t i = 0; i < soft.values.size(); ++i)
    mask.bits[i] = quantize255(soft.values[i]) > threshold;
  return mask;
}

}  // namespace specvote
