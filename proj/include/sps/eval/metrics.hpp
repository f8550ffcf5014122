#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "sps/core/types.hpp"
#include "sps/postprocess/postprocess.hpp"

namespace sps {

/// ROC curve for unknown-vs-known discrimination. Points run from (0,0) to
/// (1,1), non-decreasing in both coordinates.
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auroc = 0.0;
};

/// Kappa value per threshold quantile.
struct KappaTable {
  std::vector<std::pair<double, double>> entries;  // (quantile, kappa)
};

/// One leave-one-class-out scenario.
struct LocoScenario {
  int32_t uuc = 0;
  std::vector<int32_t> kkcs;
  std::vector<uint8_t> train_mask;  // 1 where the pixel may train a model
  LabelMap eval_gt;                 // uuc -> UNKNOWN, kucs -> IGNORE
};

/// ROC / AUROC for unknown detection. Unknown pixels are the positive class
/// and LOWER scores mean more likely unknown, so the detector statistic is
/// -score. The sweep visits each distinct statistic once (ties move along a
/// diagonal, trapezoids handle them); the area equals the pairwise
/// probability P(stat_unknown > stat_known) + 0.5 P(tie).
inline RocCurve roc_auroc(const ScoreMap& scores,
                          const std::vector<uint8_t>& gt_unknown,
                          const std::vector<uint8_t>& valid) {
  const size_t n = scores.pixel_count();
  if (gt_unknown.size() != n || valid.size() != n)
    throw std::invalid_argument("roc_auroc: mask size mismatch");

  // (statistic, is_positive), sorted by statistic descending.
  std::vector<std::pair<double, uint8_t>> samples;
  samples.reserve(n);
  int64_t n_pos = 0, n_neg = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    samples.emplace_back(-scores.values[i], gt_unknown[i]);
    (gt_unknown[i] ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument(
        "roc_auroc: needs at least one unknown and one known pixel");
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  double auroc = 0.0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < samples.size()) {
    // Consume the whole tie group at this statistic value.
    const double v = samples[i].first;
    int64_t dtp = 0, dfp = 0;
    while (i < samples.size() && samples[i].first == v) {
      (samples[i].second ? dtp : dfp) += 1;
      ++i;
    }
    const double fpr0 = static_cast<double>(fp) / n_neg;
    const double tpr0 = static_cast<double>(tp) / n_pos;
    tp += dtp;
    fp += dfp;
    const double fpr1 = static_cast<double>(fp) / n_neg;
    const double tpr1 = static_cast<double>(tp) / n_pos;
    auroc += (fpr1 - fpr0) * (tpr0 + tpr1) / 2.0;
    roc.points.emplace_back(fpr1, tpr1);
  }
  roc.auroc = auroc;
  return roc;
}

/// Cohen's kappa over the confusion matrix of {classes union UNKNOWN}.
/// Pixels outside `valid` are ignored. Returns 1 for exact agreement when
/// chance agreement is also perfect.
inline double cohen_kappa(const LabelMap& pred, const LabelMap& gt,
                          const std::vector<uint8_t>& valid) {
  require_same_shape(pred.height, pred.width, gt.height, gt.width,
                     "cohen_kappa");
  const size_t n = pred.pixel_count();
  if (valid.size() != n)
    throw std::invalid_argument("cohen_kappa: mask size mismatch");

  std::map<std::pair<int32_t, int32_t>, int64_t> confusion;
  std::map<int32_t, int64_t> pred_marginal, gt_marginal;
  int64_t total = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    confusion[{pred.labels[i], gt.labels[i]}] += 1;
    pred_marginal[pred.labels[i]] += 1;
    gt_marginal[gt.labels[i]] += 1;
    ++total;
  }
  if (total == 0) throw std::invalid_argument("cohen_kappa: empty valid mask");

  int64_t agree = 0;
  for (const auto& [key, cnt] : confusion)
    if (key.first == key.second) agree += cnt;
  const double po = static_cast<double>(agree) / total;
  double pe = 0.0;
  for (const auto& [cls, pc] : pred_marginal) {
    const auto it = gt_marginal.find(cls);
    if (it != gt_marginal.end())
      pe += (static_cast<double>(pc) / total) *
            (static_cast<double>(it->second) / total);
  }
  if (1.0 - pe < 1e-15) return 1.0;  // both marginals degenerate and equal
  return (po - pe) / (1.0 - pe);
}

/// threshold_unknown followed by cohen_kappa, per quantile.
inline KappaTable kappa_sweep(const ScoreMap& scores,
                              const LabelMap& closed_pred, const LabelMap& gt,
                              const std::vector<double>& thresholds,
                              const std::vector<uint8_t>& valid) {
  for (size_t i = 0; i + 1 < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i + 1]))
      throw std::invalid_argument("kappa_sweep: thresholds must be strictly increasing");
  for (double q : thresholds)
    if (!(q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("kappa_sweep: thresholds must lie in [0, 1]");

  KappaTable table;
  for (double q : thresholds) {
    const LabelMap thresholded = threshold_unknown(scores, closed_pred, q);
    table.entries.emplace_back(q, cohen_kappa(thresholded, gt, valid));
  }
  return table;
}

/// Threshold grids reported with the kappa tables.
inline std::vector<double> default_kappa_grid_coarse() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}
inline std::vector<double> default_kappa_grid_fine() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(0.90 + i / 100.0);
  return g;
}

/// Builds a leave-one-class-out scenario: the UUC is relabeled UNKNOWN in
/// the evaluation ground truth, KUC classes are IGNOREd, and the train mask
/// keeps only pixels of the remaining known classes.
inline LocoScenario loco_split(const LabelMap& gt, int32_t uuc,
                               const std::set<int32_t>& kuc_ids = {}) {
  const size_t n = gt.pixel_count();
  std::set<int32_t> present;
  for (int32_t v : gt.labels)
    if (!LabelMap::is_sentinel(v)) present.insert(v);
  if (!present.count(uuc))
    throw std::invalid_argument("loco_split: UUC class " + std::to_string(uuc) +
                                " absent from ground truth");

  LocoScenario sc;
  sc.uuc = uuc;
  for (int32_t c : present)
    if (c != uuc && !kuc_ids.count(c)) sc.kkcs.push_back(c);
  if (sc.kkcs.empty())
    throw std::invalid_argument("loco_split: no known classes remain");

  sc.train_mask.assign(n, 0);
  sc.eval_gt = gt;
  for (size_t i = 0; i < n; ++i) {
    const int32_t v = gt.labels[i];
    if (LabelMap::is_sentinel(v)) continue;
    if (v == uuc) {
      sc.eval_gt.labels[i] = LabelMap::kUnknown;
    } else if (kuc_ids.count(v)) {
      sc.eval_gt.labels[i] = LabelMap::kIgnore;
    } else {
      sc.train_mask[i] = 1;
    }
  }
  return sc;
}

}  // namespace sps
