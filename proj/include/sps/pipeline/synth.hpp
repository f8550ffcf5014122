#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sps/core/rng.hpp"
#include "sps/core/types.hpp"

namespace sps {

/// One synthetic class: band appearance plus a feature-space Gaussian
/// mixture (one entry in `feature_modes` per mode; a single entry makes the
/// class unimodal).
struct SynthClassSpec {
  std::vector<double> band_means;                 // length B
  std::vector<std::vector<double>> feature_modes; // each length D
  double feature_scale = 1.0;                     // per-mode isotropic stddev
};

/// Seeded synthetic-scene description standing in for a CNN backbone at
/// desk scale: a Voronoi class layout, per-class band means with i.i.d.
/// noise, per-class feature Gaussians, and an additive score-noise level
/// consumed by the pipeline after scoring.
struct SynthSpec {
  uint64_t seed = 0;
  int height = 128;
  int width = 128;
  int n_classes = 5;
  int32_t uuc = 4;
  int n_sites = 40;
  double band_noise = 0.0;
  double score_noise = 0.0;
  std::vector<SynthClassSpec> classes;

  void validate() const {
    if (height < 1 || width < 1)
      throw std::invalid_argument("synth: grid must be at least 1x1");
    if (n_classes < 2)
      throw std::invalid_argument("synth: needs at least 2 classes");
    if (uuc < 0 || uuc >= n_classes)
      throw std::invalid_argument("synth: uuc must be one of the classes");
    if (n_sites < n_classes)
      throw std::invalid_argument("synth: needs at least one site per class");
    if (static_cast<size_t>(n_sites) > static_cast<size_t>(height) * width)
      throw std::invalid_argument("synth: more sites than pixels");
    if (classes.size() != static_cast<size_t>(n_classes))
      throw std::invalid_argument("synth: classes list must have n_classes entries");
    const size_t B = classes.front().band_means.size();
    size_t D = 0;
    for (const auto& c : classes) {
      if (c.band_means.size() != B || c.band_means.empty())
        throw std::invalid_argument("synth: inconsistent band_means length");
      if (c.feature_modes.empty())
        throw std::invalid_argument("synth: every class needs >= 1 feature mode");
      for (const auto& m : c.feature_modes) {
        if (D == 0) D = m.size();
        if (m.size() != D || m.empty())
          throw std::invalid_argument("synth: inconsistent feature dimension");
      }
      if (!(c.feature_scale >= 0.0))
        throw std::invalid_argument("synth: feature_scale must be >= 0");
    }
    if (!(band_noise >= 0.0) || !(score_noise >= 0.0))
      throw std::invalid_argument("synth: noise levels must be >= 0");
  }

  int bands() const { return static_cast<int>(classes.front().band_means.size()); }
  int feature_dim() const {
    return static_cast<int>(classes.front().feature_modes.front().size());
  }
};

struct SynthScene {
  MultiBandImage image;
  LabelMap gt;
  FeatureMap features;
  LabelMap closed_pred;
};

/// Deterministic scene generation. Voronoi sites are distinct seeded pixel
/// positions assigned classes round-robin (so every class occurs); each
/// pixel takes the class of its nearest site (ties: smaller site index).
/// closed_pred equals gt except that UUC pixels are relabeled to the KKC
/// whose average feature mode is nearest the UUC's, since a closed-set
/// model never predicts the held-out class.
inline SynthScene synth_scene(const SynthSpec& spec) {
  spec.validate();
  const int H = spec.height, W = spec.width;
  const int B = spec.bands();
  const int D = spec.feature_dim();
  const size_t n = static_cast<size_t>(H) * W;

  SynthScene scene{MultiBandImage(H, W, B), LabelMap(H, W),
                   FeatureMap(H, W, D), LabelMap(H, W)};

  // Sites and ground truth.
  {
    Rng rng(mix_seed(spec.seed, 1));
    const std::vector<size_t> picks =
        rng.sample_without_replacement(n, static_cast<size_t>(spec.n_sites));
    std::vector<int> sx(spec.n_sites), sy(spec.n_sites);
    for (int s = 0; s < spec.n_sites; ++s) {
      sy[s] = static_cast<int>(picks[s] / W);
      sx[s] = static_cast<int>(picks[s] % W);
    }
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        int best = 0;
        int64_t best_d = std::numeric_limits<int64_t>::max();
        for (int s = 0; s < spec.n_sites; ++s) {
          const int64_t dx = x - sx[s], dy = y - sy[s];
          const int64_t d = dx * dx + dy * dy;
          if (d < best_d) {
            best_d = d;
            best = s;
          }
        }
        scene.gt.at(y, x) = static_cast<int32_t>(best % spec.n_classes);
      }
  }

  // Bands: class mean plus i.i.d. noise.
  {
    Rng rng(mix_seed(spec.seed, 2));
    for (size_t i = 0; i < n; ++i) {
      const auto& cls = spec.classes[static_cast<size_t>(scene.gt.labels[i])];
      for (int b = 0; b < B; ++b) {
        double v = cls.band_means[b];
        if (spec.band_noise > 0.0) v += spec.band_noise * rng.normal();
        scene.image.data[i * B + b] = static_cast<float>(v);
      }
    }
  }

  // Features: uniform mode choice, isotropic Gaussian around the mode.
  {
    Rng rng(mix_seed(spec.seed, 3));
    for (size_t i = 0; i < n; ++i) {
      const auto& cls = spec.classes[static_cast<size_t>(scene.gt.labels[i])];
      const size_t mode = (cls.feature_modes.size() > 1)
                              ? static_cast<size_t>(rng.below(cls.feature_modes.size()))
                              : 0;
      const auto& mu = cls.feature_modes[mode];
      for (int d = 0; d < D; ++d) {
        double v = mu[d];
        if (cls.feature_scale > 0.0) v += cls.feature_scale * rng.normal();
        scene.features.data[i * static_cast<size_t>(D) + d] = static_cast<float>(v);
      }
    }
  }

  // Closed-set prediction: gt, with the UUC mapped onto its nearest KKC by
  // average-feature-mode distance (ties: smaller class id).
  {
    std::vector<std::vector<double>> avg(spec.n_classes,
                                         std::vector<double>(D, 0.0));
    for (int c = 0; c < spec.n_classes; ++c) {
      for (const auto& m : spec.classes[c].feature_modes)
        for (int d = 0; d < D; ++d) avg[c][d] += m[d];
      for (int d = 0; d < D; ++d)
        avg[c][d] /= static_cast<double>(spec.classes[c].feature_modes.size());
    }
    int32_t nearest = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < spec.n_classes; ++c) {
      if (c == spec.uuc) continue;
      double d2 = 0.0;
      for (int d = 0; d < D; ++d) {
        const double diff = avg[c][d] - avg[spec.uuc][d];
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        nearest = static_cast<int32_t>(c);
      }
    }
    for (size_t i = 0; i < n; ++i)
      scene.closed_pred.labels[i] =
          (scene.gt.labels[i] == spec.uuc) ? nearest : scene.gt.labels[i];
  }

  return scene;
}

/// Adds seeded i.i.d. Gaussian noise to every non-sentinel score.
inline void add_score_noise(ScoreMap& scores, double stddev, uint64_t seed) {
  if (!(stddev > 0.0)) return;
  Rng rng(mix_seed(seed, 4));
  for (double& v : scores.values)
    if (!std::isinf(v)) v += stddev * rng.normal();
}

}  // namespace sps
