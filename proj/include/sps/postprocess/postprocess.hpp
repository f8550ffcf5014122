#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "sps/core/stats.hpp"
#include "sps/core/types.hpp"
#include "sps/fusion/fuss.hpp"  // SegmentStat

namespace sps {

enum class SmoothApplyTo { kScoresOnly, kScoresAndPrediction };

struct PostprocessParams {
  SegmentStat stat = SegmentStat::kMean;
  SmoothApplyTo apply_to = SmoothApplyTo::kScoresOnly;
  double quantile_threshold = 0.0;  // in [0, 1]

  void validate() const {
    if (!(quantile_threshold >= 0.0 && quantile_threshold <= 1.0))
      throw std::invalid_argument("postprocess: quantile must be in [0, 1]");
  }
};

/// Replaces every pixel's score by the mean (or lower median) of its
/// segment's scores. -infinity sentinels are excluded from the statistic and
/// stay unchanged; a segment with only sentinel pixels is left as-is with a
/// warning.
inline ScoreMap superpixel_smooth(const ScoreMap& scores, const SegmentMap& seg,
                                  SegmentStat stat) {
  require_same_shape(scores.height, scores.width, seg.height, seg.width,
                     "superpixel_smooth");
  const size_t n = scores.pixel_count();
  const int K = seg.n_segments;

  std::vector<double> value(K, 0.0);
  std::vector<int64_t> cnt(K, 0);
  if (stat == SegmentStat::kMean) {
    for (size_t i = 0; i < n; ++i) {
      const double s = scores.values[i];
      if (std::isinf(s)) continue;
      value[seg.labels[i]] += s;
      cnt[seg.labels[i]] += 1;
    }
    for (int k = 0; k < K; ++k)
      if (cnt[k] > 0) value[k] /= static_cast<double>(cnt[k]);
  } else {
    std::vector<std::vector<double>> bucket(K);
    for (size_t i = 0; i < n; ++i) {
      const double s = scores.values[i];
      if (std::isinf(s)) continue;
      bucket[seg.labels[i]].push_back(s);
    }
    for (int k = 0; k < K; ++k) {
      cnt[k] = static_cast<int64_t>(bucket[k].size());
      if (cnt[k] > 0) value[k] = lower_median(bucket[k]);
    }
  }
  for (int k = 0; k < K; ++k)
    if (cnt[k] == 0)
      std::cerr << "superpixel_smooth: segment " << k
                << " has no valid scores; left unchanged\n";

  ScoreMap out(scores.height, scores.width);
  for (size_t i = 0; i < n; ++i) {
    const double s = scores.values[i];
    out.values[i] = (std::isinf(s) || cnt[seg.labels[i]] == 0)
                        ? s
                        : value[seg.labels[i]];
  }
  return out;
}

/// Assigns every segment its majority class (ties: smaller class id).
/// Sentinel-labeled pixels neither vote nor change.
inline LabelMap smooth_prediction(const LabelMap& pred, const SegmentMap& seg) {
  require_same_shape(pred.height, pred.width, seg.height, seg.width,
                     "smooth_prediction");
  const size_t n = pred.pixel_count();
  const int K = seg.n_segments;

  std::vector<std::map<int32_t, int64_t>> votes(K);
  for (size_t i = 0; i < n; ++i)
    if (!LabelMap::is_sentinel(pred.labels[i]))
      votes[seg.labels[i]][pred.labels[i]] += 1;

  std::vector<int32_t> winner(K, LabelMap::kIgnore);
  for (int k = 0; k < K; ++k) {
    int64_t best = -1;
    for (const auto& [cls, cnt] : votes[k])  // ascending class id
      if (cnt > best) {
        best = cnt;
        winner[k] = cls;
      }
  }

  LabelMap out(pred.height, pred.width);
  for (size_t i = 0; i < n; ++i)
    out.labels[i] = LabelMap::is_sentinel(pred.labels[i])
                        ? pred.labels[i]
                        : winner[seg.labels[i]];
  return out;
}

/// Empirical quantile with linear interpolation over the sorted values.
inline double interpolated_quantile(std::vector<double> v, double q) {
  if (v.empty())
    throw std::invalid_argument("interpolated_quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

/// Marks pixels scoring strictly below the empirical `quantile` of the valid
/// scores as UNKNOWN; everything else keeps its closed-set label. Quantile 0
/// marks nothing; quantile 1 marks every valid pixel.
inline LabelMap threshold_unknown(const ScoreMap& scores,
                                  const LabelMap& closed_pred, double quantile) {
  require_same_shape(scores.height, scores.width, closed_pred.height,
                     closed_pred.width, "threshold_unknown");
  if (!(quantile >= 0.0 && quantile <= 1.0))
    throw std::invalid_argument("threshold_unknown: quantile must be in [0, 1]");

  const size_t n = scores.pixel_count();
  std::vector<double> valid;
  valid.reserve(n);
  for (size_t i = 0; i < n; ++i)
    if (!std::isinf(scores.values[i])) valid.push_back(scores.values[i]);
  if (valid.empty())
    throw std::invalid_argument("threshold_unknown: no valid scores");

  LabelMap out = closed_pred;
  if (quantile >= 1.0) {
    for (size_t i = 0; i < n; ++i)
      if (!std::isinf(scores.values[i])) out.labels[i] = LabelMap::kUnknown;
    return out;
  }
  const double t = interpolated_quantile(std::move(valid), quantile);
  for (size_t i = 0; i < n; ++i)
    if (!std::isinf(scores.values[i]) && scores.values[i] < t)
      out.labels[i] = LabelMap::kUnknown;
  return out;
}

}  // namespace sps
