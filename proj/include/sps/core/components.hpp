#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "sps/core/types.hpp"

namespace sps {

/// Splits every label of an integer field into its 4-connected components.
/// Component numbering is first-visit order in a row-major scan, so the
/// output is deterministic and already compact.
inline SegmentMap connected_components(const std::vector<int32_t>& labels,
                                       int height, int width) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("connected_components: empty field");
  const size_t n = static_cast<size_t>(height) * width;
  if (labels.size() != n)
    throw std::invalid_argument("connected_components: size mismatch");

  SegmentMap out(height, width);
  std::vector<int32_t>& res = out.labels;
  std::fill(res.begin(), res.end(), -1);
  std::vector<size_t> stack;
  int32_t next = 0;
  for (size_t start = 0; start < n; ++start) {
    if (res[start] != -1) continue;
    const int32_t lab = labels[start];
    res[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      const int y = static_cast<int>(p / width);
      const int x = static_cast<int>(p % width);
      const int dy[4] = {0, 0, -1, 1};
      const int dx[4] = {-1, 1, 0, 0};
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
        const size_t q = static_cast<size_t>(ny) * width + nx;
        if (res[q] == -1 && labels[q] == lab) {
          res[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }
  out.n_segments = next;
  return out;
}

inline SegmentMap connected_components(const SegmentMap& seg) {
  return connected_components(seg.labels, seg.height, seg.width);
}

/// Bijectively remaps the occurring labels onto {0..K-1} in first-occurrence
/// row-major order. Geometry is untouched.
inline SegmentMap relabel_compact(const std::vector<int32_t>& labels,
                                  int height, int width) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("relabel_compact: empty field");
  const size_t n = static_cast<size_t>(height) * width;
  if (labels.size() != n)
    throw std::invalid_argument("relabel_compact: size mismatch");

  SegmentMap out(height, width);
  std::unordered_map<int32_t, int32_t> remap;
  remap.reserve(64);
  int32_t next = 0;
  for (size_t i = 0; i < n; ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], next);
    if (inserted) ++next;
    out.labels[i] = it->second;
  }
  out.n_segments = next;
  return out;
}

inline SegmentMap relabel_compact(const SegmentMap& seg) {
  return relabel_compact(seg.labels, seg.height, seg.width);
}

}  // namespace sps
