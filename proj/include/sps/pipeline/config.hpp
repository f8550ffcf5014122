#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/core/stats.hpp"
#include "sps/fusion/fuss.hpp"
#include "sps/pipeline/synth.hpp"
#include "sps/superpixels/felzenszwalb.hpp"
#include "sps/superpixels/quickshift.hpp"
#include "sps/superpixels/slic.hpp"

namespace sps {

enum class SpsAlgorithm { kSlic, kQuickshift, kFelzenszwalb };

inline std::string to_string(SpsAlgorithm a) {
  switch (a) {
    case SpsAlgorithm::kSlic: return "slic";
    case SpsAlgorithm::kQuickshift: return "quickshift";
    default: return "felzenszwalb";
  }
}
inline SpsAlgorithm sps_algorithm_from_string(const std::string& s) {
  if (s == "slic") return SpsAlgorithm::kSlic;
  if (s == "quickshift") return SpsAlgorithm::kQuickshift;
  if (s == "felzenszwalb") return SpsAlgorithm::kFelzenszwalb;
  throw std::invalid_argument("unknown superpixel algorithm: " + s);
}

inline std::string to_string(SegmentStat s) {
  return s == SegmentStat::kMean ? "mean" : "median";
}
inline SegmentStat segment_stat_from_string(const std::string& s) {
  if (s == "mean") return SegmentStat::kMean;
  if (s == "median") return SegmentStat::kMedian;
  throw std::invalid_argument("unknown stat: " + s);
}

/// Parameters of one superpixel run. SLIC's target count may be given as a
/// pixel divisor (n_segments = n_pixels / divisor), resolved per image.
struct SpsAlgoSpec {
  SpsAlgorithm algorithm = SpsAlgorithm::kFelzenszwalb;
  SlicParams slic;
  int slic_pixel_divisor = 0;  // when > 0, overrides slic.n_segments
  QuickshiftParams quickshift;
  FelzenszwalbParams felzenszwalb;

  SlicParams resolved_slic(size_t n_pixels) const {
    SlicParams p = slic;
    if (slic_pixel_divisor > 0)
      p.n_segments = std::max<int64_t>(
          1, static_cast<int64_t>(n_pixels) / slic_pixel_divisor);
    p.n_segments = static_cast<int>(
        std::min<int64_t>(p.n_segments, static_cast<int64_t>(n_pixels)));
    return p;
  }
};

/// A single-algorithm run or a FuSS fusion of two runs.
struct SuperpixelConfig {
  std::string name;  // registry name, empty for inline configs
  bool is_fuss = false;
  SpsAlgoSpec first;
  SpsAlgoSpec second;      // fusion only
  int fuss_min_size = 50;  // fusion only
  SegmentStat fuss_stat = SegmentStat::kMean;
};

namespace detail {

inline SpsAlgoSpec slic_spec(int divisor, double compactness, double sigma) {
  SpsAlgoSpec s;
  s.algorithm = SpsAlgorithm::kSlic;
  s.slic_pixel_divisor = divisor;
  s.slic.compactness = compactness;
  s.slic.sigma = sigma;
  return s;
}
inline SpsAlgoSpec fz_spec(double scale, double sigma, int min_size) {
  SpsAlgoSpec s;
  s.algorithm = SpsAlgorithm::kFelzenszwalb;
  s.felzenszwalb = {scale, sigma, min_size};
  return s;
}
inline SpsAlgoSpec qs_spec(double kernel_size, double max_dist, double ratio) {
  SpsAlgoSpec s;
  s.algorithm = SpsAlgorithm::kQuickshift;
  s.quickshift = {kernel_size, max_dist, ratio};
  return s;
}

}  // namespace detail

inline std::vector<std::string> registry_names() {
  return {"single01", "single02", "single03", "single04", "single05",
          "fuss01",   "fuss02",   "fuss03",   "fuss04",   "fuss05",
          "fuss06"};
}

/// The named parameter bundles. FuSS entries carry both sub-configurations
/// plus the merge defaults (stat mean, minimum size 50).
inline SuperpixelConfig named_config(const std::string& name) {
  using namespace detail;
  SuperpixelConfig c;
  c.name = name;
  if (name == "single01") {
    c.first = fz_spec(100, 0.5, 50);
  } else if (name == "single02") {
    c.first = fz_spec(200, 0.5, 50);
  } else if (name == "single03") {
    c.first = slic_spec(350, 5, 1);
  } else if (name == "single04") {
    c.first = fz_spec(50, 0.5, 50);
  } else if (name == "single05") {
    c.first = fz_spec(100, 0.5, 100);
  } else if (name == "fuss01") {
    c.is_fuss = true;
    c.first = slic_spec(2000, 5, 1);
    c.second = fz_spec(200, 0.7, 200);
  } else if (name == "fuss02") {
    c.is_fuss = true;
    c.first = slic_spec(1500, 5, 1);
    c.second = fz_spec(100, 0.7, 150);
  } else if (name == "fuss03") {
    c.is_fuss = true;
    c.first = slic_spec(1000, 5, 1);
    c.second = fz_spec(100, 0.7, 150);
  } else if (name == "fuss04") {
    c.is_fuss = true;
    c.first = fz_spec(200, 0.7, 200);
    c.second = qs_spec(5, 50, 0.5);
  } else if (name == "fuss05") {
    c.is_fuss = true;
    c.first = fz_spec(200, 0.7, 200);
    c.second = qs_spec(4, 50, 0.5);
  } else if (name == "fuss06") {
    c.is_fuss = true;
    c.first = fz_spec(200, 0.7, 200);
    c.second = qs_spec(3, 50, 0.5);
  } else {
    throw std::invalid_argument("named_config: unknown configuration '" +
                                name + "'");
  }
  return c;
}

/// Runs one algorithm of a config on an image.
inline SegmentMap run_sps_algorithm(const MultiBandImage& img,
                                    const SpsAlgoSpec& spec) {
  switch (spec.algorithm) {
    case SpsAlgorithm::kSlic:
      return slic(img, spec.resolved_slic(img.pixel_count()));
    case SpsAlgorithm::kQuickshift:
      return quickshift(img, spec.quickshift);
    default:
      return felzenszwalb(img, spec.felzenszwalb);
  }
}

/// Runs a full SuperpixelConfig: either a single algorithm, or two runs
/// fused with FuSS under the image's global band covariance.
inline SegmentMap compute_segmentation(const MultiBandImage& img,
                                       const SuperpixelConfig& config) {
  SegmentMap a = run_sps_algorithm(img, config.first);
  if (!config.is_fuss) return a;
  SegmentMap b = run_sps_algorithm(img, config.second);
  FussParams params;
  params.min_size = config.fuss_min_size;
  params.stat = config.fuss_stat;
  params.covariance = band_covariance(img);
  return fuss(a, b, img, params);
}

// ---- JSON (de)serialization -------------------------------------------

inline nlohmann::json sps_algo_spec_to_json(const SpsAlgoSpec& s) {
  nlohmann::json j;
  j["algorithm"] = to_string(s.algorithm);
  switch (s.algorithm) {
    case SpsAlgorithm::kSlic:
      if (s.slic_pixel_divisor > 0)
        j["n_segments_divisor"] = s.slic_pixel_divisor;
      else
        j["n_segments"] = s.slic.n_segments;
      j["compactness"] = s.slic.compactness;
      j["sigma"] = s.slic.sigma;
      break;
    case SpsAlgorithm::kQuickshift:
      j["kernel_size"] = s.quickshift.kernel_size;
      j["max_dist"] = s.quickshift.max_dist;
      j["ratio"] = s.quickshift.ratio;
      break;
    case SpsAlgorithm::kFelzenszwalb:
      j["scale"] = s.felzenszwalb.scale;
      j["sigma"] = s.felzenszwalb.sigma;
      j["min_size"] = s.felzenszwalb.min_size;
      break;
  }
  return j;
}

inline SpsAlgoSpec sps_algo_spec_from_json(const nlohmann::json& j) {
  SpsAlgoSpec s;
  s.algorithm = sps_algorithm_from_string(j.at("algorithm").get<std::string>());
  switch (s.algorithm) {
    case SpsAlgorithm::kSlic:
      if (j.contains("n_segments_divisor"))
        s.slic_pixel_divisor = j["n_segments_divisor"].get<int>();
      if (j.contains("n_segments")) s.slic.n_segments = j["n_segments"].get<int>();
      if (j.contains("compactness")) s.slic.compactness = j["compactness"].get<double>();
      if (j.contains("sigma")) s.slic.sigma = j["sigma"].get<double>();
      break;
    case SpsAlgorithm::kQuickshift:
      if (j.contains("kernel_size")) s.quickshift.kernel_size = j["kernel_size"].get<double>();
      if (j.contains("max_dist")) s.quickshift.max_dist = j["max_dist"].get<double>();
      if (j.contains("ratio")) s.quickshift.ratio = j["ratio"].get<double>();
      break;
    case SpsAlgorithm::kFelzenszwalb:
      if (j.contains("scale")) s.felzenszwalb.scale = j["scale"].get<double>();
      if (j.contains("sigma")) s.felzenszwalb.sigma = j["sigma"].get<double>();
      if (j.contains("min_size")) s.felzenszwalb.min_size = j["min_size"].get<int>();
      break;
  }
  return s;
}

inline nlohmann::json superpixel_config_to_json(const SuperpixelConfig& c) {
  nlohmann::json j;
  if (!c.name.empty()) j["config"] = c.name;
  if (c.is_fuss) {
    j["fuss"] = {{"a", sps_algo_spec_to_json(c.first)},
                 {"b", sps_algo_spec_to_json(c.second)},
                 {"min_size", c.fuss_min_size},
                 {"stat", to_string(c.fuss_stat)}};
  } else {
    j["single"] = sps_algo_spec_to_json(c.first);
  }
  return j;
}

inline SuperpixelConfig superpixel_config_from_json(const nlohmann::json& j) {
  if (j.contains("config")) {
    SuperpixelConfig c = named_config(j["config"].get<std::string>());
    if (j.contains("fuss")) {
      const auto& f = j["fuss"];
      if (f.contains("min_size")) c.fuss_min_size = f["min_size"].get<int>();
      if (f.contains("stat"))
        c.fuss_stat = segment_stat_from_string(f["stat"].get<std::string>());
    }
    return c;
  }
  SuperpixelConfig c;
  if (j.contains("fuss")) {
    const auto& f = j["fuss"];
    c.is_fuss = true;
    c.first = sps_algo_spec_from_json(f.at("a"));
    c.second = sps_algo_spec_from_json(f.at("b"));
    if (f.contains("min_size")) c.fuss_min_size = f["min_size"].get<int>();
    if (f.contains("stat"))
      c.fuss_stat = segment_stat_from_string(f["stat"].get<std::string>());
  } else if (j.contains("single")) {
    c.first = sps_algo_spec_from_json(j["single"]);
  } else {
    throw std::invalid_argument(
        "superpixel config: expected 'config', 'single' or 'fuss'");
  }
  return c;
}

inline nlohmann::json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["height"] = s.height;
  j["width"] = s.width;
  j["n_classes"] = s.n_classes;
  j["uuc"] = s.uuc;
  j["n_sites"] = s.n_sites;
  j["band_noise"] = s.band_noise;
  j["score_noise"] = s.score_noise;
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : s.classes)
    classes.push_back({{"band_means", c.band_means},
                       {"feature_modes", c.feature_modes},
                       {"feature_scale", c.feature_scale}});
  j["classes"] = std::move(classes);
  return j;
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.n_classes = j.at("n_classes").get<int>();
  s.uuc = j.at("uuc").get<int32_t>();
  s.n_sites = j.at("n_sites").get<int>();
  if (j.contains("band_noise")) s.band_noise = j["band_noise"].get<double>();
  if (j.contains("score_noise")) s.score_noise = j["score_noise"].get<double>();
  for (const auto& c : j.at("classes")) {
    SynthClassSpec cls;
    cls.band_means = c.at("band_means").get<std::vector<double>>();
    cls.feature_modes =
        c.at("feature_modes").get<std::vector<std::vector<double>>>();
    if (c.contains("feature_scale"))
      cls.feature_scale = c["feature_scale"].get<double>();
    s.classes.push_back(std::move(cls));
  }
  s.validate();
  return s;
}

}  // namespace sps
