#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sps/core/components.hpp"
#include "sps/core/types.hpp"
#include "sps/core/union_find.hpp"

namespace sps {

/// Absorbs every segment with pixel count < min_size into the 4-adjacent
/// neighbor sharing the longest border (ties: smaller neighbor id). Repeats
/// until nothing is undersized or a single segment remains. Input must be a
/// valid SegmentMap; the output is compact-relabeled in first-occurrence
/// order. Merging only 4-adjacent segments keeps every output segment
/// 4-connected.
inline SegmentMap absorb_small_segments(const SegmentMap& seg,
                                        double min_size) {
  const int K = seg.n_segments;
  const size_t n = seg.pixel_count();
  const int H = seg.height, W = seg.width;

  std::vector<int64_t> size(K, 0);
  for (size_t i = 0; i < n; ++i) size[seg.labels[i]] += 1;

  // Border length in pixel-edges, keyed per segment. Keys may go stale as
  // segments merge; they are re-rooted on demand.
  std::vector<std::map<int32_t, int64_t>> nbr(K);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int32_t a = seg.at(y, x);
      if (x + 1 < W) {
        const int32_t b = seg.at(y, x + 1);
        if (a != b) {
          nbr[a][b] += 1;
          nbr[b][a] += 1;
        }
      }
      if (y + 1 < H) {
        const int32_t b = seg.at(y + 1, x);
        if (a != b) {
          nbr[a][b] += 1;
          nbr[b][a] += 1;
        }
      }
    }

  UnionFind uf(K);
  auto compacted = [&](int32_t root) {
    std::map<int32_t, int64_t> fresh;
    for (const auto& [nb, len] : nbr[root]) {
      const int32_t nr = static_cast<int32_t>(uf.find(nb));
      if (nr != root) fresh[nr] += len;
    }
    nbr[root] = std::move(fresh);
  };

  int alive = K;
  bool changed = true;
  while (changed && alive > 1) {
    changed = false;
    for (int32_t s = 0; s < K; ++s) {
      if (static_cast<int32_t>(uf.find(s)) != s) continue;  // absorbed
      if (static_cast<double>(size[s]) >= min_size) continue;

      compacted(s);
      if (nbr[s].empty()) continue;
      int32_t best = -1;
      int64_t best_len = -1;
      for (const auto& [nr, len] : nbr[s])
        if (len > best_len) {  // ascending key order keeps the smallest id on ties
          best = nr;
          best_len = len;
        }
      uf.merge_into(s, best);
      size[best] += size[s];
      for (const auto& [nb, len] : nbr[s]) nbr[best][nb] += len;
      nbr[s].clear();
      --alive;
      changed = true;
      if (alive <= 1) break;
    }
  }

  std::vector<int32_t> out(n);
  for (size_t i = 0; i < n; ++i)
    out[i] = static_cast<int32_t>(uf.find(seg.labels[i]));
  return relabel_compact(out, H, W);
}

}  // namespace sps
