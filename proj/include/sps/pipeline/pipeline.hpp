#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/eval/metrics.hpp"
#include "sps/io/npy.hpp"
#include "sps/io/ppm.hpp"
#include "sps/openset/models.hpp"
#include "sps/openset/serialize.hpp"
#include "sps/pipeline/config.hpp"
#include "sps/pipeline/synth.hpp"
#include "sps/postprocess/postprocess.hpp"

namespace sps {

/// Whole-scene processing is in-memory; larger inputs are rejected rather
/// than silently tiled.
constexpr size_t kMaxPipelinePixels = size_t{2048} * 2048;

struct PipelineConfig {
  uint64_t seed = 0;
  bool seed_set = false;

  // Exactly one of the two input modes.
  struct FileInputs {
    std::string image, features, closed_pred, gt;
  };
  std::optional<FileInputs> files;
  std::optional<SynthSpec> synthetic;

  int32_t uuc = -1;  // required for file inputs; synthetic carries its own
  std::set<int32_t> kuc_ids;

  ModelKind scorer_kind = ModelKind::kGmm;
  ClassModelParams scorer_params;
  ScoreCombine score_combine = ScoreCombine::kPredictedClass;
  size_t max_samples_per_class = 100000;

  std::optional<SuperpixelConfig> superpixels;
  bool postprocess_enabled = true;
  SegmentStat postprocess_stat = SegmentStat::kMean;
  SmoothApplyTo apply_to = SmoothApplyTo::kScoresOnly;
  double preview_quantile = 0.5;  // PPM overlay threshold only

  std::vector<double> kappa_thresholds = default_kappa_grid_coarse();
  std::string output_dir = "out";
};

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("schema_version") && j["schema_version"].get<int>() != 1)
    throw std::invalid_argument("pipeline config: unsupported schema version");
  if (j.contains("seed")) {
    c.seed = j["seed"].get<uint64_t>();
    c.seed_set = true;
  }
  const bool has_files = j.contains("inputs");
  const bool has_synth = j.contains("synthetic");
  if (has_files == has_synth)
    throw std::invalid_argument(
        "pipeline config: exactly one of 'inputs' and 'synthetic' required");
  if (has_files) {
    const auto& in = j["inputs"];
    c.files = PipelineConfig::FileInputs{
        in.at("image").get<std::string>(), in.at("features").get<std::string>(),
        in.at("closed_pred").get<std::string>(), in.at("gt").get<std::string>()};
  } else {
    c.synthetic = synth_spec_from_json(j["synthetic"]);
  }
  if (j.contains("loco")) {
    const auto& l = j["loco"];
    if (l.contains("uuc")) c.uuc = l["uuc"].get<int32_t>();
    if (l.contains("kuc"))
      for (const auto& k : l["kuc"]) c.kuc_ids.insert(k.get<int32_t>());
  }
  if (j.contains("scorer")) {
    const auto& s = j["scorer"];
    if (s.contains("kind"))
      c.scorer_kind = model_kind_from_string(s["kind"].get<std::string>());
    if (s.contains("gmm_components"))
      c.scorer_params.gmm_components = s["gmm_components"].get<int>();
    if (s.contains("pcs_components"))
      c.scorer_params.pcs_components = s["pcs_components"].get<int>();
    if (s.contains("reg_covar"))
      c.scorer_params.gmm_reg_covar = s["reg_covar"].get<double>();
    if (s.contains("max_samples_per_class"))
      c.max_samples_per_class = s["max_samples_per_class"].get<size_t>();
    if (s.contains("combine")) {
      const std::string m = s["combine"].get<std::string>();
      if (m == "predicted")
        c.score_combine = ScoreCombine::kPredictedClass;
      else if (m == "max")
        c.score_combine = ScoreCombine::kMaxOverClasses;
      else
        throw std::invalid_argument("pipeline config: unknown combine mode " + m);
    }
  }
  if (j.contains("superpixels"))
    c.superpixels = superpixel_config_from_json(j["superpixels"]);
  if (j.contains("postprocess")) {
    const auto& p = j["postprocess"];
    if (p.contains("enabled")) c.postprocess_enabled = p["enabled"].get<bool>();
    if (p.contains("stat"))
      c.postprocess_stat = segment_stat_from_string(p["stat"].get<std::string>());
    if (p.contains("apply_to")) {
      const std::string a = p["apply_to"].get<std::string>();
      if (a == "scores_only")
        c.apply_to = SmoothApplyTo::kScoresOnly;
      else if (a == "scores_and_prediction")
        c.apply_to = SmoothApplyTo::kScoresAndPrediction;
      else
        throw std::invalid_argument("pipeline config: unknown apply_to " + a);
    }
    if (p.contains("preview_quantile"))
      c.preview_quantile = p["preview_quantile"].get<double>();
  }
  if (j.contains("metrics") && j["metrics"].contains("kappa_thresholds"))
    c.kappa_thresholds =
        j["metrics"]["kappa_thresholds"].get<std::vector<double>>();
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  return c;
}

/// Seed precedence: explicit flag > config file > SPS_SEED env > 0.
inline uint64_t resolve_seed(const PipelineConfig& config,
                             std::optional<uint64_t> flag_seed) {
  if (flag_seed) return *flag_seed;
  if (config.seed_set) return config.seed;
  if (const char* env = std::getenv("SPS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("SPS_SEED is not an integer: " +
                                  std::string(env));
    }
  }
  return 0;
}

struct PipelineResult {
  double auroc = 0.0;
  RocCurve roc;
  KappaTable kappa;
  nlohmann::json report;
};

namespace detail {

[[noreturn]] inline void rethrow_with_stage(const std::string& stage) {
  try {
    throw;
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("stage " + stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + stage + ": " + e.what());
  }
}

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (...) {
    rethrow_with_stage(name);
  }
}

}  // namespace detail

/// Runs the full open-set pipeline: inputs (files or synthetic scene), LOCO
/// split, per-class model fitting, scoring, optional superpixel smoothing,
/// threshold/kappa sweep, and report + artifact emission. Every output is a
/// pure function of the configuration and seed.
inline PipelineResult run_pipeline(const PipelineConfig& config,
                                   std::optional<uint64_t> flag_seed = {},
                                   bool write_outputs = true) {
  namespace fs = std::filesystem;
  const uint64_t seed = resolve_seed(config, flag_seed);

  // Stage: inputs.
  MultiBandImage image;
  FeatureMap features;
  LabelMap closed_pred, gt;
  int32_t uuc = config.uuc;
  double score_noise = 0.0;
  detail::stage("inputs", [&] {
    if (config.files) {
      image = npy::load_image(config.files->image);
      features = npy::load_features(config.files->features);
      closed_pred = npy::load_labels(config.files->closed_pred);
      gt = npy::load_labels(config.files->gt);
      if (uuc < 0)
        throw std::invalid_argument("file inputs require loco.uuc");
    } else {
      SynthSpec spec = *config.synthetic;
      spec.seed = seed;
      SynthScene scene = synth_scene(spec);
      image = std::move(scene.image);
      features = std::move(scene.features);
      closed_pred = std::move(scene.closed_pred);
      gt = std::move(scene.gt);
      uuc = spec.uuc;
      score_noise = spec.score_noise;
    }
    require_same_shape(image.height, image.width, features.height,
                       features.width, "pipeline inputs");
    require_same_shape(image.height, image.width, closed_pred.height,
                       closed_pred.width, "pipeline inputs");
    require_same_shape(image.height, image.width, gt.height, gt.width,
                       "pipeline inputs");
    if (image.pixel_count() > kMaxPipelinePixels)
      throw std::invalid_argument(
          "pipeline: image exceeds the supported size (" +
          std::to_string(kMaxPipelinePixels) +
          " pixels); tiled processing is not supported");
    return 0;
  });

  // Stage: LOCO split and model fitting.
  LocoScenario loco;
  ClassModelSet models;
  detail::stage("fit-models", [&] {
    loco = loco_split(gt, uuc, config.kuc_ids);
    LabelMap train_labels(gt.height, gt.width, LabelMap::kIgnore);
    for (size_t i = 0; i < gt.pixel_count(); ++i)
      if (loco.train_mask[i]) train_labels.labels[i] = gt.labels[i];
    models = fit_class_models(features, train_labels, config.scorer_kind,
                              config.scorer_params, seed,
                              config.max_samples_per_class);
    return 0;
  });

  // Stage: scoring.
  ScoreMap raw_scores = detail::stage("score", [&] {
    ScoreMap s = open_set_score_map(models, features, closed_pred,
                                    config.score_combine);
    add_score_noise(s, score_noise, seed);
    return s;
  });

  // Stage: segmentation.
  std::optional<SegmentMap> segments;
  if (config.superpixels) {
    segments = detail::stage("segment", [&] {
      SegmentMap s = compute_segmentation(image, *config.superpixels);
      require_valid_segment_map(s, "pipeline segmentation");
      return s;
    });
  }

  // Stage: postprocess.
  ScoreMap final_scores = raw_scores;
  LabelMap final_pred = closed_pred;
  if (config.postprocess_enabled && segments) {
    detail::stage("postprocess", [&] {
      final_scores =
          superpixel_smooth(raw_scores, *segments, config.postprocess_stat);
      if (config.apply_to == SmoothApplyTo::kScoresAndPrediction)
        final_pred = smooth_prediction(closed_pred, *segments);
      return 0;
    });
  }

  // Stage: metrics.
  PipelineResult result;
  detail::stage("metrics", [&] {
    const size_t n = gt.pixel_count();
    std::vector<uint8_t> valid(n, 0), gt_unknown(n, 0);
    for (size_t i = 0; i < n; ++i) {
      const int32_t g = loco.eval_gt.labels[i];
      if (g == LabelMap::kIgnore) continue;
      if (std::isinf(final_scores.values[i])) continue;
      valid[i] = 1;
      gt_unknown[i] = (g == LabelMap::kUnknown) ? 1 : 0;
    }
    result.roc = roc_auroc(final_scores, gt_unknown, valid);
    result.auroc = result.roc.auroc;
    result.kappa = kappa_sweep(final_scores, final_pred, loco.eval_gt,
                               config.kappa_thresholds, valid);

    nlohmann::json report;
    report["schema_version"] = 1;
    report["seed"] = seed;
    report["uuc"] = uuc;
    report["scorer"] = to_string(models.kind);
    if (config.superpixels)
      report["superpixels"] = superpixel_config_to_json(*config.superpixels);
    report["postprocess_enabled"] = config.postprocess_enabled && segments.has_value();
    report["auroc"] = result.auroc;
    nlohmann::json roc_points = nlohmann::json::array();
    for (const auto& [fpr, tpr] : result.roc.points)
      roc_points.push_back({fpr, tpr});
    report["roc"] = std::move(roc_points);
    nlohmann::json kappa = nlohmann::json::array();
    for (const auto& [q, k] : result.kappa.entries)
      kappa.push_back({{"quantile", q}, {"kappa", k}});
    report["kappa"] = std::move(kappa);
    int64_t n_valid = 0, n_unknown = 0;
    for (size_t i = 0; i < n; ++i) {
      n_valid += valid[i];
      n_unknown += (valid[i] && gt_unknown[i]) ? 1 : 0;
    }
    report["counts"] = {{"pixels", n},
                        {"valid", n_valid},
                        {"unknown_gt", n_unknown},
                        {"known_gt", n_valid - n_unknown},
                        {"segments", segments ? segments->n_segments : 0}};
    result.report = std::move(report);
    return 0;
  });

  if (write_outputs) {
    detail::stage("write-outputs", [&] {
      fs::create_directories(config.output_dir);
      const fs::path dir(config.output_dir);
      std::ofstream rep(dir / "report.json", std::ios::binary);
      if (!rep) throw std::runtime_error("cannot write report.json");
      rep << result.report.dump(2) << "\n";

      npy::save_scores(raw_scores, (dir / "scores.npy").string());
      npy::save_scores(final_scores, (dir / "scores_final.npy").string());
      npy::save_labels(closed_pred, (dir / "closed_pred.npy").string());
      npy::save_labels(loco.eval_gt, (dir / "eval_gt.npy").string());
      if (segments) {
        npy::save_segments(*segments, (dir / "segments.npy").string());
        ppm::save_segments(*segments, (dir / "segments.ppm").string());
      }
      if (!config.files) {
        npy::save_image(image, (dir / "image.npy").string());
        npy::save_features(features, (dir / "features.npy").string());
        npy::save_labels(gt, (dir / "gt.npy").string());
      }
      save_class_model_set(models, (dir / "models.json").string());
      ppm::save_scores(final_scores, (dir / "scores.ppm").string());
      const LabelMap preview =
          threshold_unknown(final_scores, final_pred, config.preview_quantile);
      ppm::save_labels(preview, (dir / "prediction.ppm").string());
      ppm::save_labels(loco.eval_gt, (dir / "eval_gt.ppm").string());
      return 0;
    });
  }
  return result;
}

}  // namespace sps
