#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sps/core/rng.hpp"
#include "sps/core/types.hpp"

// Binary PPM (P6) emitters for eyeballing results. These files are a
// convenience output only and are never parsed back.

namespace sps::ppm {

namespace detail {

inline void write_p6(const std::string& path, int height, int width,
                     const std::vector<uint8_t>& rgb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("ppm: cannot open for writing: " + path);
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
  if (!out) throw std::runtime_error("ppm: write failed: " + path);
}

inline void label_color(int64_t label, uint8_t* rgb) {
  const uint64_t h = mix_seed(0x5e9f00d5u, static_cast<uint64_t>(label));
  rgb[0] = static_cast<uint8_t>(64 + (h & 0xbf));
  rgb[1] = static_cast<uint8_t>(64 + ((h >> 8) & 0xbf));
  rgb[2] = static_cast<uint8_t>(64 + ((h >> 16) & 0xbf));
}

}  // namespace detail

/// Each segment gets a pseudo-random (label-hashed) color.
inline void save_segments(const SegmentMap& seg, const std::string& path) {
  std::vector<uint8_t> rgb(seg.pixel_count() * 3);
  for (size_t i = 0; i < seg.pixel_count(); ++i)
    detail::label_color(seg.labels[i], &rgb[i * 3]);
  detail::write_p6(path, seg.height, seg.width, rgb);
}

/// Class colors with sentinel overlays: UNKNOWN in red, IGNORE in black.
inline void save_labels(const LabelMap& labels, const std::string& path) {
  std::vector<uint8_t> rgb(labels.pixel_count() * 3);
  for (size_t i = 0; i < labels.pixel_count(); ++i) {
    const int32_t v = labels.labels[i];
    if (v == LabelMap::kUnknown) {
      rgb[i * 3] = 220;
      rgb[i * 3 + 1] = 30;
      rgb[i * 3 + 2] = 30;
    } else if (v == LabelMap::kIgnore) {
      rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = 0;
    } else {
      detail::label_color(v, &rgb[i * 3]);
    }
  }
  detail::write_p6(path, labels.height, labels.width, rgb);
}

/// Grayscale score rendering; sentinels in red. Finite scores are scaled
/// to the observed min/max.
inline void save_scores(const ScoreMap& scores, const std::string& path) {
  double lo = 0.0, hi = 0.0;
  bool seen = false;
  for (double v : scores.values) {
    if (std::isinf(v)) continue;
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = (hi > lo) ? hi - lo : 1.0;
  std::vector<uint8_t> rgb(scores.pixel_count() * 3);
  for (size_t i = 0; i < scores.pixel_count(); ++i) {
    const double v = scores.values[i];
    if (std::isinf(v)) {
      rgb[i * 3] = 220;
      rgb[i * 3 + 1] = 30;
      rgb[i * 3 + 2] = 30;
      continue;
    }
    const uint8_t g = static_cast<uint8_t>(255.0 * (v - lo) / span);
    rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = g;
  }
  detail::write_p6(path, scores.height, scores.width, rgb);
}

}  // namespace sps::ppm
