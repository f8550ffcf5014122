#pragma once

// Shared generators for the test suites. All randomness flows through
// sps::Rng so every test is reproducible.

#include <cstdint>
#include <vector>

#include "sps/core/rng.hpp"
#include "sps/core/types.hpp"

namespace testutil {

inline sps::MultiBandImage random_image(int h, int w, int b, uint64_t seed,
                                        double lo = 0.0, double hi = 1.0) {
  sps::Rng rng(seed);
  sps::MultiBandImage img(h, w, b);
  for (float& v : img.data)
    v = static_cast<float>(lo + (hi - lo) * rng.uniform());
  return img;
}

inline std::vector<int32_t> random_labels(int h, int w, int n_labels,
                                          uint64_t seed) {
  sps::Rng rng(seed);
  std::vector<int32_t> labels(static_cast<size_t>(h) * w);
  for (int32_t& v : labels)
    v = static_cast<int32_t>(rng.below(static_cast<uint64_t>(n_labels)));
  return labels;
}

inline sps::ScoreMap random_scores(int h, int w, uint64_t seed, double lo = 0.0,
                                   double hi = 1.0) {
  sps::Rng rng(seed);
  sps::ScoreMap s(h, w);
  for (double& v : s.values) v = lo + (hi - lo) * rng.uniform();
  return s;
}

/// Blocky segmentation: grid of rectangular tiles, tile = segment.
inline sps::SegmentMap tile_segments(int h, int w, int tile) {
  sps::SegmentMap seg(h, w);
  const int nx = (w + tile - 1) / tile;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      seg.at(y, x) = (y / tile) * nx + (x / tile);
  seg.n_segments = ((h + tile - 1) / tile) * nx;
  return seg;
}

}  // namespace testutil
