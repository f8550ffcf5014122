// Command-line front end for the segmentation toolkit.
//
// Subcommands: segment, fuss, fit-models, score, postprocess, metrics,
// synth, pipeline. Exit codes: 0 success, 2 validation error, 1 runtime
// error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sps/sps.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

std::vector<uint8_t> valid_mask(const sps::LabelMap& gt,
                                const sps::ScoreMap& scores) {
  std::vector<uint8_t> valid(gt.pixel_count(), 0);
  for (size_t i = 0; i < gt.pixel_count(); ++i)
    valid[i] = (gt.labels[i] != sps::LabelMap::kIgnore &&
                !std::isinf(scores.values[i]))
                   ? 1
                   : 0;
  return valid;
}

struct SegmentCli {
  std::string image, out, ppm, config, algorithm = "felzenszwalb";
  int n_segments = 100;
  double compactness = 5.0;
  double sigma = 0.0;
  double scale = 100.0;
  int min_size = 50;
  double kernel_size = 5.0;
  double max_dist = 10.0;
  double ratio = 1.0;
  int slic_divisor = 0;
};

int run_segment(const SegmentCli& cli) {
  const sps::MultiBandImage img = sps::npy::load_image(cli.image);
  sps::SuperpixelConfig config;
  if (!cli.config.empty()) {
    config = sps::named_config(cli.config);
  } else {
    sps::SpsAlgoSpec spec;
    spec.algorithm = sps::sps_algorithm_from_string(cli.algorithm);
    spec.slic = {cli.n_segments, cli.compactness, cli.sigma};
    spec.slic_pixel_divisor = cli.slic_divisor;
    spec.quickshift = {cli.kernel_size, cli.max_dist, cli.ratio};
    spec.felzenszwalb = {cli.scale, cli.sigma, cli.min_size};
    config.first = spec;
  }
  const sps::SegmentMap seg = sps::compute_segmentation(img, config);
  sps::require_valid_segment_map(seg, "segment output");
  sps::npy::save_segments(seg, cli.out);
  if (!cli.ppm.empty()) sps::ppm::save_segments(seg, cli.ppm);
  std::cout << "segments: " << seg.n_segments << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel segmentation, fusion, open-set scoring and evaluation"};
  app.require_subcommand(1);

  // segment
  SegmentCli seg_cli;
  CLI::App* seg = app.add_subcommand("segment", "Generate a superpixel segmentation");
  seg->add_option("--image", seg_cli.image, "Input image (H x W x B float32 NPY)")->required();
  seg->add_option("--out", seg_cli.out, "Output segment map (int32 NPY)")->required();
  seg->add_option("--ppm", seg_cli.ppm, "Optional PPM visualization");
  seg->add_option("--config", seg_cli.config, "Named configuration (single01..fuss06)");
  seg->add_option("--algorithm", seg_cli.algorithm, "slic | quickshift | felzenszwalb");
  seg->add_option("--n_segments", seg_cli.n_segments, "SLIC target segment count");
  seg->add_option("--n_segments_divisor", seg_cli.slic_divisor,
                  "SLIC target = n_pixels / divisor (overrides --n_segments)");
  seg->add_option("--compactness", seg_cli.compactness, "SLIC compactness");
  seg->add_option("--sigma", seg_cli.sigma, "Pre-smoothing sigma (slic/felzenszwalb)");
  seg->add_option("--scale", seg_cli.scale, "Felzenszwalb scale");
  seg->add_option("--min_size", seg_cli.min_size, "Felzenszwalb minimum segment size");
  seg->add_option("--kernel_size", seg_cli.kernel_size, "Quickshift density bandwidth");
  seg->add_option("--max_dist", seg_cli.max_dist, "Quickshift link cutoff");
  seg->add_option("--ratio", seg_cli.ratio, "Quickshift band/spatial balance (0,1]");

  // fuss
  std::string fuss_a, fuss_b, fuss_image, fuss_out, fuss_ppm, fuss_stat = "mean";
  int fuss_min_size = 50;
  CLI::App* fz = app.add_subcommand("fuss", "Fuse two segmentations");
  fz->add_option("--seg-a", fuss_a, "First segmentation (int32 NPY)")->required();
  fz->add_option("--seg-b", fuss_b, "Second segmentation (int32 NPY)")->required();
  fz->add_option("--image", fuss_image, "Image that was segmented")->required();
  fz->add_option("--min-size", fuss_min_size, "Minimum output segment size");
  fz->add_option("--stat", fuss_stat, "Representative statistic: mean | median");
  fz->add_option("--out", fuss_out, "Output segment map")->required();
  fz->add_option("--ppm", fuss_ppm, "Optional PPM visualization");

  // fit-models
  std::string fm_features, fm_labels, fm_out, fm_kind = "gmm";
  int fm_components = 0;
  double fm_reg = 1e-6;
  uint64_t fm_seed = 0;
  size_t fm_max_samples = 100000;
  CLI::App* fm = app.add_subcommand("fit-models", "Fit per-class density models");
  fm->add_option("--features", fm_features, "Feature map (H x W x D float32 NPY)")->required();
  fm->add_option("--labels", fm_labels, "Training labels (int32 NPY; sentinels ignored)")->required();
  fm->add_option("--kind", fm_kind, "gmm | pcs");
  fm->add_option("--components", fm_components,
                 "Component count (default: 4 for gmm, 16 for pcs)");
  fm->add_option("--reg-covar", fm_reg, "GMM covariance regularization");
  fm->add_option("--seed", fm_seed, "RNG seed");
  fm->add_option("--max-samples", fm_max_samples, "Per-class sample cap");
  fm->add_option("--out", fm_out, "Output model JSON")->required();

  // score
  std::string sc_features, sc_pred, sc_models, sc_out, sc_combine = "predicted";
  CLI::App* sc = app.add_subcommand("score", "Per-pixel open-set scores");
  sc->add_option("--features", sc_features, "Feature map NPY")->required();
  sc->add_option("--pred", sc_pred, "Closed-set prediction NPY")->required();
  sc->add_option("--models", sc_models, "Model JSON from fit-models")->required();
  sc->add_option("--combine", sc_combine, "predicted | max");
  sc->add_option("--out", sc_out, "Output score map NPY")->required();

  // postprocess
  std::string pp_scores, pp_segments, pp_pred, pp_out, pp_stat = "mean",
              pp_apply = "scores_only";
  double pp_quantile = -1.0;
  CLI::App* pp = app.add_subcommand("postprocess", "Superpixel-smooth scores");
  pp->add_option("--scores", pp_scores, "Score map NPY")->required();
  pp->add_option("--segments", pp_segments, "Segment map NPY")->required();
  pp->add_option("--stat", pp_stat, "mean | median");
  pp->add_option("--pred", pp_pred, "Closed-set prediction NPY");
  pp->add_option("--apply-to", pp_apply, "scores_only | scores_and_prediction");
  pp->add_option("--quantile", pp_quantile,
                 "Emit UNKNOWN-thresholded labels instead of smoothed scores "
                 "(requires --pred)");
  pp->add_option("--out", pp_out, "Output NPY")->required();

  // metrics
  std::string mt_scores, mt_pred, mt_gt, mt_out, mt_csv;
  std::vector<double> mt_thresholds;
  CLI::App* mt = app.add_subcommand("metrics", "AUROC and kappa report");
  mt->add_option("--scores", mt_scores, "Score map NPY")->required();
  mt->add_option("--pred", mt_pred, "Prediction NPY")->required();
  mt->add_option("--gt", mt_gt,
                 "Ground truth NPY (UNKNOWN = -1 marks the held-out class)")
      ->required();
  mt->add_option("--thresholds", mt_thresholds, "Kappa threshold quantiles");
  mt->add_option("--out", mt_out, "Output report JSON")->required();
  mt->add_option("--csv", mt_csv, "Optional kappa table CSV");

  // synth
  std::string sy_spec, sy_dir;
  std::optional<uint64_t> sy_seed;
  CLI::App* sy = app.add_subcommand("synth", "Generate a synthetic scene");
  sy->add_option("--spec", sy_spec, "SynthSpec JSON")->required();
  sy->add_option("--seed", sy_seed, "Override the spec seed");
  sy->add_option("--out-dir", sy_dir, "Output directory")->required();

  // pipeline
  std::string pl_config, pl_dir;
  std::optional<uint64_t> pl_seed;
  CLI::App* pl = app.add_subcommand("pipeline", "Run the full pipeline");
  pl->add_option("--config", pl_config, "PipelineConfig JSON")->required();
  pl->add_option("--seed", pl_seed, "Seed override (beats config and SPS_SEED)");
  pl->add_option("--out-dir", pl_dir, "Output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (seg->parsed()) return run_segment(seg_cli);

    if (fz->parsed()) {
      const sps::MultiBandImage img = sps::npy::load_image(fuss_image);
      const sps::SegmentMap a = sps::npy::load_segments(fuss_a);
      const sps::SegmentMap b = sps::npy::load_segments(fuss_b);
      sps::FussParams params;
      params.min_size = fuss_min_size;
      params.stat = sps::segment_stat_from_string(fuss_stat);
      params.covariance = sps::band_covariance(img);
      const sps::SegmentMap out = sps::fuss(a, b, img, params);
      sps::require_valid_segment_map(out, "fuss output");
      sps::npy::save_segments(out, fuss_out);
      if (!fuss_ppm.empty()) sps::ppm::save_segments(out, fuss_ppm);
      std::cout << "segments: " << out.n_segments << "\n";
      return 0;
    }

    if (fm->parsed()) {
      const sps::FeatureMap features = sps::npy::load_features(fm_features);
      const sps::LabelMap labels = sps::npy::load_labels(fm_labels);
      const sps::ModelKind kind = sps::model_kind_from_string(fm_kind);
      sps::ClassModelParams params;
      if (fm_components > 0) {
        params.gmm_components = fm_components;
        params.pcs_components = fm_components;
      }
      params.gmm_reg_covar = fm_reg;
      const sps::ClassModelSet models = sps::fit_class_models(
          features, labels, kind, params, fm_seed, fm_max_samples);
      sps::save_class_model_set(models, fm_out);
      std::cout << "classes: " << models.class_ids().size() << "\n";
      return 0;
    }

    if (sc->parsed()) {
      const sps::FeatureMap features = sps::npy::load_features(sc_features);
      const sps::LabelMap pred = sps::npy::load_labels(sc_pred);
      const sps::ClassModelSet models = sps::load_class_model_set(sc_models);
      const sps::ScoreCombine combine =
          sc_combine == "max" ? sps::ScoreCombine::kMaxOverClasses
                              : sps::ScoreCombine::kPredictedClass;
      if (sc_combine != "max" && sc_combine != "predicted")
        throw std::invalid_argument("score: unknown combine mode " + sc_combine);
      const sps::ScoreMap scores =
          sps::open_set_score_map(models, features, pred, combine);
      sps::npy::save_scores(scores, sc_out);
      return 0;
    }

    if (pp->parsed()) {
      const sps::ScoreMap scores = sps::npy::load_scores(pp_scores);
      const sps::SegmentMap segments = sps::npy::load_segments(pp_segments);
      const sps::SegmentStat stat = sps::segment_stat_from_string(pp_stat);
      const sps::ScoreMap smoothed = sps::superpixel_smooth(scores, segments, stat);
      if (pp_quantile >= 0.0) {
        if (pp_pred.empty())
          throw std::invalid_argument("postprocess: --quantile requires --pred");
        sps::LabelMap pred = sps::npy::load_labels(pp_pred);
        if (pp_apply == "scores_and_prediction")
          pred = sps::smooth_prediction(pred, segments);
        const sps::LabelMap out =
            sps::threshold_unknown(smoothed, pred, pp_quantile);
        sps::npy::save_labels(out, pp_out);
      } else {
        sps::npy::save_scores(smoothed, pp_out);
      }
      return 0;
    }

    if (mt->parsed()) {
      const sps::ScoreMap scores = sps::npy::load_scores(mt_scores);
      const sps::LabelMap pred = sps::npy::load_labels(mt_pred);
      const sps::LabelMap gt = sps::npy::load_labels(mt_gt);
      const std::vector<uint8_t> valid = valid_mask(gt, scores);
      std::vector<uint8_t> unknown(gt.pixel_count(), 0);
      for (size_t i = 0; i < gt.pixel_count(); ++i)
        unknown[i] = gt.labels[i] == sps::LabelMap::kUnknown ? 1 : 0;
      const sps::RocCurve roc = sps::roc_auroc(scores, unknown, valid);
      const std::vector<double> grid =
          mt_thresholds.empty() ? sps::default_kappa_grid_coarse() : mt_thresholds;
      const sps::KappaTable kappa =
          sps::kappa_sweep(scores, pred, gt, grid, valid);

      nlohmann::json report;
      report["schema_version"] = 1;
      report["auroc"] = roc.auroc;
      nlohmann::json points = nlohmann::json::array();
      for (const auto& [fpr, tpr] : roc.points) points.push_back({fpr, tpr});
      report["roc"] = std::move(points);
      nlohmann::json kt = nlohmann::json::array();
      for (const auto& [q, k] : kappa.entries)
        kt.push_back({{"quantile", q}, {"kappa", k}});
      report["kappa"] = std::move(kt);
      int64_t n_valid = 0, n_unknown = 0;
      for (size_t i = 0; i < gt.pixel_count(); ++i) {
        n_valid += valid[i];
        n_unknown += valid[i] && unknown[i];
      }
      report["counts"] = {{"pixels", gt.pixel_count()},
                          {"valid", n_valid},
                          {"unknown_gt", n_unknown}};
      std::ofstream out(mt_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + mt_out);
      out << report.dump(2) << "\n";
      if (!mt_csv.empty()) {
        std::ofstream csv(mt_csv, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + mt_csv);
        csv << "quantile,kappa\n";
        for (const auto& [q, k] : kappa.entries) csv << q << "," << k << "\n";
      }
      std::cout << "auroc: " << roc.auroc << "\n";
      return 0;
    }

    if (sy->parsed()) {
      sps::SynthSpec spec = sps::synth_spec_from_json(load_json_file(sy_spec));
      if (sy_seed) spec.seed = *sy_seed;
      const sps::SynthScene scene = sps::synth_scene(spec);
      std::filesystem::create_directories(sy_dir);
      const std::filesystem::path dir(sy_dir);
      sps::npy::save_image(scene.image, (dir / "image.npy").string());
      sps::npy::save_labels(scene.gt, (dir / "gt.npy").string());
      sps::npy::save_features(scene.features, (dir / "features.npy").string());
      sps::npy::save_labels(scene.closed_pred, (dir / "closed_pred.npy").string());
      sps::ppm::save_labels(scene.gt, (dir / "gt.ppm").string());
      return 0;
    }

    if (pl->parsed()) {
      sps::PipelineConfig config =
          sps::pipeline_config_from_json(load_json_file(pl_config));
      if (!pl_dir.empty()) config.output_dir = pl_dir;
      const sps::PipelineResult result = sps::run_pipeline(config, pl_seed);
      std::cout << "auroc: " << result.auroc << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
