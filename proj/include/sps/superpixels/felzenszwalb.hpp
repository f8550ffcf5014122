#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sps/core/absorb.hpp"
#include "sps/core/components.hpp"
#include "sps/core/gaussian.hpp"
#include "sps/core/types.hpp"

namespace sps {

struct FelzenszwalbParams {
  double scale = 100.0;  // k: larger favors larger components
  double sigma = 0.5;    // pre-smoothing
  int min_size = 50;     // minimum component size, enforced post hoc

  void validate() const {
    if (!(scale > 0.0))
      throw std::invalid_argument("felzenszwalb: scale must be positive");
    if (!std::isfinite(sigma) || sigma < 0.0)
      throw std::invalid_argument("felzenszwalb: sigma must be finite and >= 0");
    if (min_size < 1)
      throw std::invalid_argument("felzenszwalb: min_size must be >= 1");
  }
};

namespace detail {

struct GridEdge {
  int32_t a, b;
  float w;
};

// 8-connected grid edges in creation order: row-major pixels, neighbors
// enumerated E, S, SE, SW. Weight is the Euclidean band distance.
inline std::vector<GridEdge> grid_edges(const MultiBandImage& img) {
  const int H = img.height, W = img.width, B = img.bands;
  std::vector<GridEdge> edges;
  edges.reserve(static_cast<size_t>(H) * W * 4);
  auto weight = [&](int y0, int x0, int y1, int x1) {
    double acc = 0.0;
    for (int b = 0; b < B; ++b) {
      const double d = static_cast<double>(img.at(y0, x0, b)) - img.at(y1, x1, b);
      acc += d * d;
    }
    return static_cast<float>(std::sqrt(acc));
  };
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int32_t p = y * W + x;
      if (x + 1 < W) edges.push_back({p, p + 1, weight(y, x, y, x + 1)});
      if (y + 1 < H) edges.push_back({p, p + W, weight(y, x, y + 1, x)});
      if (x + 1 < W && y + 1 < H)
        edges.push_back({p, p + W + 1, weight(y, x, y + 1, x + 1)});
      if (x - 1 >= 0 && y + 1 < H)
        edges.push_back({p, p + W - 1, weight(y, x, y + 1, x - 1)});
    }
  return edges;
}

}  // namespace detail

/// Graph-based segmentation: Kruskal-style merging over the 8-connected
/// grid sorted by edge weight (stable, so ties keep creation order) with
/// the adaptive predicate w <= min(Int(C) + scale/|C|); a second pass in the
/// same order merges across any edge while either side is undersized. The
/// 8-connected merge can leave diagonal-only bridges, so the result is split
/// into 4-connected components; fragments this creates below min_size are
/// absorbed into their longest-border neighbor.
inline SegmentMap felzenszwalb(const MultiBandImage& img,
                               const FelzenszwalbParams& params) {
  params.validate();
  const MultiBandImage smooth = gaussian_smooth(img, params.sigma);
  const int H = smooth.height, W = smooth.width;
  const size_t n = smooth.pixel_count();

  std::vector<detail::GridEdge> edges = detail::grid_edges(smooth);
  std::stable_sort(edges.begin(), edges.end(),
                   [](const detail::GridEdge& a, const detail::GridEdge& b) {
                     return a.w < b.w;
                   });

  UnionFind uf(n);
  std::vector<float> internal(n, 0.0f);  // Int(C), indexed by root
  std::vector<int64_t> size(n, 1);
  auto threshold = [&](size_t root) {
    return internal[root] + static_cast<float>(params.scale / static_cast<double>(size[root]));
  };

  for (const detail::GridEdge& e : edges) {
    const size_t ra = uf.find(e.a), rb = uf.find(e.b);
    if (ra == rb) continue;
    if (e.w <= threshold(ra) && e.w <= threshold(rb)) {
      const size_t keep = uf.merge_into(ra, rb);
      size[keep] = size[ra] + size[rb];
      internal[keep] = std::max({internal[ra], internal[rb], e.w});
    }
  }

  // Small-component pass in the same edge order.
  for (const detail::GridEdge& e : edges) {
    const size_t ra = uf.find(e.a), rb = uf.find(e.b);
    if (ra == rb) continue;
    if (size[ra] < params.min_size || size[rb] < params.min_size) {
      const size_t keep = uf.merge_into(ra, rb);
      size[keep] = size[ra] + size[rb];
    }
  }

  std::vector<int32_t> labels(n);
  for (size_t p = 0; p < n; ++p)
    labels[p] = static_cast<int32_t>(uf.find(p));
  SegmentMap split = connected_components(labels, H, W);
  return absorb_small_segments(split, static_cast<double>(params.min_size));
}

}  // namespace sps
