#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sps/core/rng.hpp"
#include "sps/core/types.hpp"
#include "sps/openset/gmm.hpp"
#include "sps/openset/pcs.hpp"

namespace sps {

enum class ModelKind { kGmm, kPcs };

inline std::string to_string(ModelKind k) {
  return k == ModelKind::kGmm ? "gmm" : "pcs";
}
inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "gmm") return ModelKind::kGmm;
  if (s == "pcs") return ModelKind::kPcs;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct ClassModelParams {
  int gmm_components = 4;
  double gmm_reg_covar = 1e-6;
  int gmm_max_iters = 100;
  double gmm_tol = 1e-3;
  int pcs_components = 16;
};

/// One fitted density model per known class, all sharing the feature
/// dimension.
struct ClassModelSet {
  ModelKind kind = ModelKind::kGmm;
  int dim = 0;
  uint64_t seed = 0;
  std::map<int32_t, GmmModel> gmm;  // by class id
  std::map<int32_t, PcsModel> pcs;

  std::vector<int32_t> class_ids() const {
    std::vector<int32_t> ids;
    if (kind == ModelKind::kGmm)
      for (const auto& [c, _] : gmm) ids.push_back(c);
    else
      for (const auto& [c, _] : pcs) ids.push_back(c);
    return ids;
  }
  bool has_class(int32_t c) const {
    return kind == ModelKind::kGmm ? gmm.count(c) > 0 : pcs.count(c) > 0;
  }
};

namespace detail {

/// Feature vectors of the pixels labeled `class_id`, optionally subsampled
/// (seeded, uniform without replacement) to at most max_samples rows.
inline Eigen::MatrixXd gather_class_features(const FeatureMap& features,
                                             const LabelMap& labels,
                                             int32_t class_id,
                                             size_t max_samples, Rng& rng) {
  std::vector<size_t> idx;
  const size_t n = labels.pixel_count();
  for (size_t i = 0; i < n; ++i)
    if (labels.labels[i] == class_id) idx.push_back(i);
  if (max_samples > 0 && idx.size() > max_samples) {
    const std::vector<size_t> pick =
        rng.sample_without_replacement(idx.size(), max_samples);
    std::vector<size_t> sub(pick.size());
    for (size_t j = 0; j < pick.size(); ++j) sub[j] = idx[pick[j]];
    idx = std::move(sub);
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), features.depth);
  for (size_t r = 0; r < idx.size(); ++r)
    for (int d = 0; d < features.depth; ++d)
      X(static_cast<Eigen::Index>(r), d) = features.data[idx[r] * features.depth + d];
  return X;
}

}  // namespace detail

/// Fits one model per class occurring in train_labels (sentinel labels are
/// never fitted). Per-class sampling uses an independent substream of the
/// seed so results do not depend on class iteration order.
inline ClassModelSet fit_class_models(const FeatureMap& features,
                                      const LabelMap& train_labels,
                                      ModelKind kind,
                                      const ClassModelParams& params = {},
                                      uint64_t seed = 0,
                                      size_t max_samples_per_class = 100000) {
  require_same_shape(features.height, features.width, train_labels.height,
                     train_labels.width, "fit_class_models");

  std::map<int32_t, int64_t> counts;
  for (int32_t v : train_labels.labels)
    if (!LabelMap::is_sentinel(v)) counts[v] += 1;
  if (counts.empty())
    throw std::invalid_argument("fit_class_models: no labeled pixels");

  ClassModelSet set;
  set.kind = kind;
  set.dim = features.depth;
  set.seed = seed;

  for (const auto& [class_id, count] : counts) {
    const int64_t min_needed = (kind == ModelKind::kGmm)
                                   ? params.gmm_components
                                   : params.pcs_components + 1;
    if (count < min_needed)
      throw std::invalid_argument(
          "fit_class_models: class " + std::to_string(class_id) + " has " +
          std::to_string(count) + " samples, needs at least " +
          std::to_string(min_needed));
    Rng rng(mix_seed(seed, static_cast<uint64_t>(class_id)));
    const Eigen::MatrixXd X = detail::gather_class_features(
        features, train_labels, class_id, max_samples_per_class, rng);
    if (kind == ModelKind::kGmm) {
      set.gmm.emplace(class_id,
                      fit_gmm(X, params.gmm_components, params.gmm_reg_covar,
                              mix_seed(seed, static_cast<uint64_t>(class_id) + (1ULL << 32)),
                              params.gmm_max_iters, params.gmm_tol));
    } else {
      set.pcs.emplace(class_id, fit_pcs(X, params.pcs_components));
    }
  }
  return set;
}

enum class ScoreCombine { kPredictedClass, kMaxOverClasses };

/// Per-pixel open-set score: the log-likelihood of the pixel's feature under
/// the model of its closed-set predicted class (default), or the maximum
/// over all class models. Sentinel-labeled pixels score -infinity and are
/// excluded from downstream statistics.
inline ScoreMap open_set_score_map(
    const ClassModelSet& models, const FeatureMap& features,
    const LabelMap& closed_pred,
    ScoreCombine combine = ScoreCombine::kPredictedClass) {
  require_same_shape(features.height, features.width, closed_pred.height,
                     closed_pred.width, "open_set_score_map");
  if (features.depth != models.dim)
    throw std::invalid_argument("open_set_score_map: feature dimension mismatch");

  const std::vector<int32_t> ids = models.class_ids();
  for (int32_t v : closed_pred.labels)
    if (!LabelMap::is_sentinel(v) && !models.has_class(v))
      throw std::invalid_argument("open_set_score_map: no model for class " +
                                  std::to_string(v));

  const size_t n = features.pixel_count();
  ScoreMap out(features.height, features.width);
  auto score_rows = [&](int32_t c, const Eigen::MatrixXd& X) {
    return models.kind == ModelKind::kGmm
               ? gmm_log_likelihood(models.gmm.at(c), X)
               : pcs_log_likelihood(models.pcs.at(c), X);
  };

  if (combine == ScoreCombine::kPredictedClass) {
    // Each pixel only needs its own class's model; score per-class batches.
    std::map<int32_t, std::vector<size_t>> by_class;
    for (size_t i = 0; i < n; ++i) {
      const int32_t pred = closed_pred.labels[i];
      if (LabelMap::is_sentinel(pred))
        out.values[i] = -std::numeric_limits<double>::infinity();
      else
        by_class[pred].push_back(i);
    }
    for (const auto& [c, idx] : by_class) {
      Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), features.depth);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int d = 0; d < features.depth; ++d)
          X(static_cast<Eigen::Index>(r), d) =
              features.data[idx[r] * features.depth + d];
      const Eigen::VectorXd s = score_rows(c, X);
      for (size_t r = 0; r < idx.size(); ++r)
        out.values[idx[r]] = s[static_cast<Eigen::Index>(r)];
    }
  } else {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), features.depth);
    for (size_t i = 0; i < n; ++i)
      for (int d = 0; d < features.depth; ++d)
        X(static_cast<Eigen::Index>(i), d) = features.data[i * features.depth + d];
    Eigen::VectorXd best = Eigen::VectorXd::Constant(
        static_cast<Eigen::Index>(n), -std::numeric_limits<double>::infinity());
    for (int32_t c : ids) best = best.cwiseMax(score_rows(c, X));
    for (size_t i = 0; i < n; ++i)
      out.values[i] = LabelMap::is_sentinel(closed_pred.labels[i])
                          ? -std::numeric_limits<double>::infinity()
                          : best[static_cast<Eigen::Index>(i)];
  }
  return out;
}

}  // namespace sps
