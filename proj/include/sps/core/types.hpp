#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Core raster types shared by every module.
//
// All rasters are row-major. Multi-band data is band-interleaved:
// value(y, x, b) lives at data[(y * width + x) * bands + b], which matches
// the on-disk H x W x B C-contiguous layout exactly.

namespace sps {

/// H x W x B raster of real-valued band intensities.
struct MultiBandImage {
  int height = 0;
  int width = 0;
  int bands = 0;
  std::vector<float> data;

  MultiBandImage() = default;
  MultiBandImage(int h, int w, int b)
      : height(h), width(w), bands(b),
        data(static_cast<size_t>(h) * w * b, 0.0f) {
    if (h < 1 || w < 1 || b < 1)
      throw std::invalid_argument("MultiBandImage: dimensions must be >= 1");
  }

  float at(int y, int x, int b) const {
    return data[(static_cast<size_t>(y) * width + x) * bands + b];
  }
  float& at(int y, int x, int b) {
    return data[(static_cast<size_t>(y) * width + x) * bands + b];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }

  bool all_finite() const {
    for (float v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// H x W integer label field partitioning the raster into segments.
/// Invariants: labels form the compact set {0..n_segments-1}, every label
/// occurs, and every segment is a single 4-connected component.
struct SegmentMap {
  int height = 0;
  int width = 0;
  int n_segments = 0;
  std::vector<int32_t> labels;

  SegmentMap() = default;
  SegmentMap(int h, int w)
      : height(h), width(w), labels(static_cast<size_t>(h) * w, 0) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("SegmentMap: dimensions must be >= 1");
  }

  int32_t at(int y, int x) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
  int32_t& at(int y, int x) {
    return labels[static_cast<size_t>(y) * width + x];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
};

/// H x W real-valued score field. Higher means more in-distribution.
/// -infinity is the documented sentinel for pixels excluded from statistics
/// and metrics; every other value must be finite.
struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  ScoreMap() = default;
  ScoreMap(int h, int w)
      : height(h), width(w), values(static_cast<size_t>(h) * w, 0.0) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("ScoreMap: dimensions must be >= 1");
  }

  double at(int y, int x) const {
    return values[static_cast<size_t>(y) * width + x];
  }
  double& at(int y, int x) {
    return values[static_cast<size_t>(y) * width + x];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
};

/// H x W class-id field. Class ids are {0..C-1}; two reserved sentinels
/// live outside that range: kUnknown (-1) and kIgnore (-2).
struct LabelMap {
  static constexpr int32_t kUnknown = -1;
  static constexpr int32_t kIgnore = -2;

  int height = 0;
  int width = 0;
  std::vector<int32_t> labels;

  LabelMap() = default;
  LabelMap(int h, int w, int32_t fill = 0)
      : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {
    if (h < 1 || w < 1)
      throw std::invalid_argument("LabelMap: dimensions must be >= 1");
  }

  int32_t at(int y, int x) const {
    return labels[static_cast<size_t>(y) * width + x];
  }
  int32_t& at(int y, int x) {
    return labels[static_cast<size_t>(y) * width + x];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }

  static bool is_sentinel(int32_t v) { return v == kUnknown || v == kIgnore; }
};

/// H x W x D per-pixel feature tensor, same interleaved layout as images.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int depth = 0;
  std::vector<float> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int d)
      : height(h), width(w), depth(d),
        data(static_cast<size_t>(h) * w * d, 0.0f) {
    if (h < 1 || w < 1 || d < 1)
      throw std::invalid_argument("FeatureMap: dimensions must be >= 1");
  }

  float at(int y, int x, int d) const {
    return data[(static_cast<size_t>(y) * width + x) * depth + d];
  }
  float& at(int y, int x, int d) {
    return data[(static_cast<size_t>(y) * width + x) * depth + d];
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
};

inline bool same_shape(int h1, int w1, int h2, int w2) {
  return h1 == h2 && w1 == w2;
}

inline void require_same_shape(int h1, int w1, int h2, int w2,
                               const std::string& what) {
  if (!same_shape(h1, w1, h2, w2))
    throw std::invalid_argument(what + ": shape mismatch (" +
                                std::to_string(h1) + "x" + std::to_string(w1) +
                                " vs " + std::to_string(h2) + "x" +
                                std::to_string(w2) + ")");
}

/// Validates the SegmentMap invariants: compact labels {0..K-1} all present,
/// and each label forming a single 4-connected component. Returns an empty
/// string when valid, else a description of the first violation.
std::string validate_segment_map(const SegmentMap& seg);

inline void require_valid_segment_map(const SegmentMap& seg,
                                      const std::string& what) {
  std::string err = validate_segment_map(seg);
  if (!err.empty()) throw std::invalid_argument(what + ": " + err);
}

inline std::string validate_segment_map(const SegmentMap& seg) {
  if (seg.height < 1 || seg.width < 1) return "empty segment map";
  const size_t n = seg.pixel_count();
  if (seg.labels.size() != n) return "label buffer size mismatch";
  if (seg.n_segments < 1) return "n_segments must be >= 1";
  for (size_t i = 0; i < n; ++i)
    if (seg.labels[i] < 0 || seg.labels[i] >= seg.n_segments)
      return "label out of range at index " + std::to_string(i);

  // One BFS per first-seen pixel; a second first-seen pixel for the same
  // label means the segment is not 4-connected.
  std::vector<uint8_t> visited(n, 0);
  std::vector<uint8_t> label_seen(static_cast<size_t>(seg.n_segments), 0);
  std::vector<size_t> stack;
  const int W = seg.width, H = seg.height;
  for (size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    const int32_t lab = seg.labels[start];
    if (label_seen[lab])
      return "segment " + std::to_string(lab) + " is not 4-connected";
    label_seen[lab] = 1;
    stack.assign(1, start);
    visited[start] = 1;
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      const int y = static_cast<int>(p / W), x = static_cast<int>(p % W);
      const int dy[4] = {0, 0, -1, 1};
      const int dx[4] = {-1, 1, 0, 0};
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
        const size_t q = static_cast<size_t>(ny) * W + nx;
        if (!visited[q] && seg.labels[q] == lab) {
          visited[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  for (int32_t lab = 0; lab < seg.n_segments; ++lab)
    if (!label_seen[lab])
      return "label " + std::to_string(lab) + " never occurs";
  return {};
}

}  // namespace sps
