#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iostream>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sps/core/components.hpp"
#include "sps/core/stats.hpp"
#include "sps/core/types.hpp"
#include "sps/core/union_find.hpp"

namespace sps {

enum class SegmentStat { kMean, kMedian };

struct FussParams {
  int min_size = 50;
  SegmentStat stat = SegmentStat::kMean;
  CovarianceMatrix covariance;  // over the image bands

  void validate(int image_bands) const {
    if (min_size < 1)
      throw std::invalid_argument("fuss: min_size must be >= 1");
    if (covariance.dim() != image_bands)
      throw std::invalid_argument(
          "fuss: covariance dimension does not match image band count");
  }
};

/// Per-segment sets of 4-adjacent neighbors with shared-border lengths in
/// pixel-edges. Symmetric, no self-loops.
struct AdjacencyGraph {
  std::vector<std::map<int32_t, int64_t>> neighbors;  // [seg] -> {nbr: border}

  static AdjacencyGraph build(const SegmentMap& seg) {
    AdjacencyGraph g;
    g.neighbors.resize(seg.n_segments);
    const int H = seg.height, W = seg.width;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const int32_t a = seg.at(y, x);
        if (x + 1 < W) {
          const int32_t b = seg.at(y, x + 1);
          if (a != b) {
            g.neighbors[a][b] += 1;
            g.neighbors[b][a] += 1;
          }
        }
        if (y + 1 < H) {
          const int32_t b = seg.at(y + 1, x);
          if (a != b) {
            g.neighbors[a][b] += 1;
            g.neighbors[b][a] += 1;
          }
        }
      }
    return g;
  }
};

/// Common refinement of two segmentations: two pixels share an output label
/// iff they share labels in both inputs and are 4-connected through pixels
/// with the same (s1, s2) label pair. Output is compact-labeled.
inline SegmentMap join_segmentations(const SegmentMap& s1,
                                     const SegmentMap& s2) {
  require_same_shape(s1.height, s1.width, s2.height, s2.width,
                     "join_segmentations");
  const size_t n = s1.pixel_count();
  std::vector<int32_t> key(n);
  std::unordered_map<int64_t, int32_t> seen;
  seen.reserve(256);
  int32_t next = 0;
  for (size_t i = 0; i < n; ++i) {
    const int64_t k =
        static_cast<int64_t>(s1.labels[i]) * s2.n_segments + s2.labels[i];
    auto [it, inserted] = seen.try_emplace(k, next);
    if (inserted) ++next;
    key[i] = it->second;
  }
  // Intersection cells of two contiguous segments can be disconnected;
  // splitting keeps the SegmentMap contiguity invariant.
  return connected_components(key, s1.height, s1.width);
}

namespace detail {

inline Eigen::VectorXd stat_vector(const SegmentStats& st, int seg,
                                   SegmentStat stat) {
  Eigen::VectorXd v(st.bands);
  for (int b = 0; b < st.bands; ++b)
    v[b] = (stat == SegmentStat::kMean) ? st.mean(seg, b) : st.median(seg, b);
  return v;
}

}  // namespace detail

/// Mahalanobis distance between two feature vectors under cov.
inline double mahalanobis_distance(const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b,
                                   const CovarianceMatrix& cov) {
  if (a.size() != b.size())
    throw std::invalid_argument("mahalanobis_distance: dimension mismatch");
  return cov.mahalanobis(a - b);
}

/// The 4-adjacent neighbor of seg_id minimizing the Mahalanobis distance
/// between segment representatives (params.stat vectors). Ties break by
/// longer shared border, then smaller neighbor id.
inline int32_t closest_neighbor(int32_t seg_id, const SegmentMap& seg,
                                const SegmentStats& stats,
                                const AdjacencyGraph& adj,
                                const FussParams& params) {
  if (seg_id < 0 || seg_id >= seg.n_segments)
    throw std::invalid_argument("closest_neighbor: segment id out of range");
  const auto& nbrs = adj.neighbors[seg_id];
  if (nbrs.empty())
    throw std::invalid_argument("closest_neighbor: segment has no neighbors");

  const Eigen::VectorXd rep = detail::stat_vector(stats, seg_id, params.stat);
  int32_t best = -1;
  double best_d = 0.0;
  int64_t best_border = -1;
  for (const auto& [nb, border] : nbrs) {  // ascending id
    const double d = mahalanobis_distance(
        rep, detail::stat_vector(stats, nb, params.stat), params.covariance);
    if (best == -1 || d < best_d || (d == best_d && border > best_border)) {
      best = nb;
      best_d = d;
      best_border = border;
    }
  }
  return best;
}

/// FuSS: joins s1 and s2 into their common refinement, then repeatedly
/// merges the smallest segment below min_size (ties: smaller label) into
/// its Mahalanobis-closest 4-adjacent neighbor, recomputing stats exactly
/// after every merge, until nothing is undersized or one segment remains.
inline SegmentMap fuss(const SegmentMap& s1, const SegmentMap& s2,
                       const MultiBandImage& img, const FussParams& params) {
  require_same_shape(s1.height, s1.width, img.height, img.width, "fuss");
  params.validate(img.bands);

  SegmentMap joint = join_segmentations(s1, s2);
  const size_t n = joint.pixel_count();
  int64_t min_size = params.min_size;
  if (min_size > static_cast<int64_t>(n)) {
    std::cerr << "fuss: min_size " << min_size << " exceeds pixel count "
              << n << "; clamping\n";
    min_size = static_cast<int64_t>(n);
  }

  const int K = joint.n_segments;
  const int B = img.bands;

  // Mutable merge state, all indexed by joint label.
  std::vector<int64_t> count(K, 0);
  std::vector<std::vector<size_t>> pixels(K);
  std::vector<Eigen::VectorXd> sum(K, Eigen::VectorXd::Zero(B));
  for (size_t i = 0; i < n; ++i) {
    const int32_t s = joint.labels[i];
    count[s] += 1;
    pixels[s].push_back(i);
    for (int b = 0; b < B; ++b) sum[s][b] += img.data[i * B + b];
  }
  AdjacencyGraph adj = AdjacencyGraph::build(joint);

  std::vector<char> alive(K, 1);
  int n_alive = K;

  auto representative = [&](int32_t s) {
    Eigen::VectorXd v(B);
    if (params.stat == SegmentStat::kMean) {
      v = sum[s] / static_cast<double>(count[s]);
    } else {
      std::vector<double> vals;
      vals.reserve(pixels[s].size());
      for (int b = 0; b < B; ++b) {
        vals.clear();
        for (size_t i : pixels[s]) vals.push_back(img.data[i * B + b]);
        v[b] = lower_median(vals);
      }
    }
    return v;
  };

  using QEntry = std::pair<int64_t, int32_t>;  // (size, label), both ascending
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> queue;
  for (int32_t s = 0; s < K; ++s) queue.emplace(count[s], s);

  while (!queue.empty() && n_alive > 1) {
    const auto [sz, s] = queue.top();
    queue.pop();
    if (!alive[s] || count[s] != sz) continue;  // stale entry
    if (sz >= min_size) break;                  // smallest is big enough

    // Closest neighbor by representative distance; ties by longer border,
    // then smaller id.
    const Eigen::VectorXd rep = representative(s);
    int32_t target = -1;
    double best_d = 0.0;
    int64_t best_border = -1;
    for (const auto& [nb, border] : adj.neighbors[s]) {
      const double d = params.covariance.mahalanobis(rep - representative(nb));
      if (target == -1 || d < best_d || (d == best_d && border > best_border)) {
        target = nb;
        best_d = d;
        best_border = border;
      }
    }
    if (target == -1) break;  // isolated segment; cannot happen for K >= 2

    // Merge s into target: exact sums/counts, pixels appended, adjacency
    // folded (s's neighbors become target's, border lengths added).
    count[target] += count[s];
    sum[target] += sum[s];
    auto& dst = pixels[target];
    dst.insert(dst.end(), pixels[s].begin(), pixels[s].end());
    pixels[s].clear();
    for (const auto& [nb, border] : adj.neighbors[s]) {
      if (nb == target) continue;
      adj.neighbors[nb].erase(s);
      adj.neighbors[nb][target] += border;
      adj.neighbors[target][nb] += border;
    }
    adj.neighbors[target].erase(s);
    adj.neighbors[s].clear();
    alive[s] = 0;
    --n_alive;
    queue.emplace(count[target], target);
  }

  // Write back merged labels and compact them.
  std::vector<int32_t> out(n, -1);
  for (int32_t s = 0; s < K; ++s)
    for (size_t i : pixels[s]) out[i] = s;
  return relabel_compact(out, joint.height, joint.width);
}

}  // namespace sps
