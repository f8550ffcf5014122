#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sps/core/absorb.hpp"
#include "sps/core/components.hpp"
#include "sps/core/gaussian.hpp"
#include "sps/core/types.hpp"

namespace sps {

struct SlicParams {
  int n_segments = 100;      // target cluster count K
  double compactness = 5.0;  // m, weight of the spatial term
  double sigma = 0.0;        // pre-smoothing

  void validate(size_t n_pixels) const {
    if (n_segments < 1)
      throw std::invalid_argument("slic: n_segments must be >= 1");
    if (static_cast<size_t>(n_segments) > n_pixels)
      throw std::invalid_argument("slic: n_segments exceeds pixel count");
    if (!(compactness > 0.0))
      throw std::invalid_argument("slic: compactness must be positive");
    if (!std::isfinite(sigma) || sigma < 0.0)
      throw std::invalid_argument("slic: sigma must be finite and >= 0");
  }
};

namespace detail {

struct SlicCenter {
  std::vector<double> band;  // per-band mean
  double x = 0.0, y = 0.0;
};

// Sum over bands of squared forward differences; the forward difference is 0
// at the right/bottom image edge.
inline std::vector<double> gradient_map(const MultiBandImage& img) {
  const int H = img.height, W = img.width, B = img.bands;
  std::vector<double> g(static_cast<size_t>(H) * W, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) {
        if (x + 1 < W) {
          const double d = static_cast<double>(img.at(y, x + 1, b)) - img.at(y, x, b);
          acc += d * d;
        }
        if (y + 1 < H) {
          const double d = static_cast<double>(img.at(y + 1, x, b)) - img.at(y, x, b);
          acc += d * d;
        }
      }
      g[static_cast<size_t>(y) * W + x] = acc;
    }
  return g;
}

}  // namespace detail

/// K-means-style superpixels on a regular seed grid.
///
/// Steps: Gaussian pre-smooth; seeds on a uniform grid with spacing
/// S = sqrt(H*W/K); each seed moved to the lowest-gradient spot in its 3x3
/// neighborhood (strict improvement only); up to max_iters rounds where each
/// center claims pixels in a 2Sx2S window minimizing
/// sqrt(d_band^2 + (d_xy/S)^2 * m^2) with distance ties going to the
/// later-visited center; finally components smaller than S^2/4 are absorbed
/// into their longest-border neighbor and labels compacted.
inline SegmentMap slic(const MultiBandImage& img, const SlicParams& params,
                       int max_iters = 10) {
  params.validate(img.pixel_count());
  if (max_iters < 1)
    throw std::invalid_argument("slic: max_iters must be >= 1");

  const MultiBandImage smooth = gaussian_smooth(img, params.sigma);
  const int H = smooth.height, W = smooth.width, B = smooth.bands;
  const double S =
      std::sqrt(static_cast<double>(H) * W / params.n_segments);
  const double m = params.compactness;

  // Seed grid: one row/column of seeds per S-sized stripe, at least one per
  // axis so narrow images still get seeded.
  std::vector<detail::SlicCenter> centers;
  {
    const int ny = std::max(1, static_cast<int>(std::lround(H / S)));
    const int nx = std::max(1, static_cast<int>(std::lround(W / S)));
    const std::vector<double> grad = detail::gradient_map(smooth);
    for (int gy = 0; gy < ny; ++gy)
      for (int gx = 0; gx < nx; ++gx) {
        int sy = static_cast<int>((gy + 0.5) * H / ny);
        int sx = static_cast<int>((gx + 0.5) * W / nx);
        // Perturb to the lowest-gradient position in the 3x3 neighborhood.
        double best_g = grad[static_cast<size_t>(sy) * W + sx];
        int by = sy, bx = sx;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = sy + dy, nx = sx + dx;
            if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
            const double g = grad[static_cast<size_t>(ny) * W + nx];
            if (g < best_g) {
              best_g = g;
              by = ny;
              bx = nx;
            }
          }
        detail::SlicCenter c;
        c.band.resize(B);
        for (int b = 0; b < B; ++b) c.band[b] = smooth.at(by, bx, b);
        c.x = bx;
        c.y = by;
        centers.push_back(std::move(c));
      }
  }
  const int K = static_cast<int>(centers.size());

  const size_t n = smooth.pixel_count();
  std::vector<int32_t> label(n, 0);
  std::vector<double> dist(n);
  const int win = static_cast<int>(std::ceil(S));

  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (int k = 0; k < K; ++k) {
      const detail::SlicCenter& c = centers[k];
      const int cy = static_cast<int>(std::lround(c.y));
      const int cx = static_cast<int>(std::lround(c.x));
      const int y0 = std::max(0, cy - win), y1 = std::min(H - 1, cy + win);
      const int x0 = std::max(0, cx - win), x1 = std::min(W - 1, cx + win);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          double db2 = 0.0;
          for (int b = 0; b < B; ++b) {
            const double d = smooth.at(y, x, b) - c.band[b];
            db2 += d * d;
          }
          const double dx = x - c.x, dy = y - c.y;
          const double dxy2 = dx * dx + dy * dy;
          const double d = std::sqrt(db2 + dxy2 / (S * S) * m * m);
          const size_t p = static_cast<size_t>(y) * W + x;
          if (d <= dist[p]) {  // ties go to the later center
            dist[p] = d;
            label[p] = k;
          }
        }
    }
    // Pixels outside every window keep their previous assignment; on the
    // first round they are claimed by the globally nearest center instead.
    if (iter == 0) {
      for (size_t p = 0; p < n; ++p) {
        if (std::isfinite(dist[p])) continue;
        const int y = static_cast<int>(p) / W, x = static_cast<int>(p) % W;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
          double db2 = 0.0;
          for (int b = 0; b < B; ++b) {
            const double d = smooth.at(y, x, b) - centers[k].band[b];
            db2 += d * d;
          }
          const double dx = x - centers[k].x, dy = y - centers[k].y;
          const double d = std::sqrt(db2 + (dx * dx + dy * dy) / (S * S) * m * m);
          if (d <= best) {
            best = d;
            label[p] = k;
          }
        }
        dist[p] = best;
      }
    }

    // Update step: move centers to the mean of their pixels.
    std::vector<double> acc(static_cast<size_t>(K) * (B + 2), 0.0);
    std::vector<int64_t> cnt(K, 0);
    for (size_t p = 0; p < n; ++p) {
      const int k = label[p];
      const int y = static_cast<int>(p) / W, x = static_cast<int>(p) % W;
      double* a = &acc[static_cast<size_t>(k) * (B + 2)];
      for (int b = 0; b < B; ++b) a[b] += smooth.at(y, x, b);
      a[B] += x;
      a[B + 1] += y;
      cnt[k] += 1;
    }
    for (int k = 0; k < K; ++k) {
      if (cnt[k] == 0) continue;  // empty cluster keeps its center
      const double* a = &acc[static_cast<size_t>(k) * (B + 2)];
      for (int b = 0; b < B; ++b) centers[k].band[b] = a[b] / cnt[k];
      centers[k].x = a[B] / cnt[k];
      centers[k].y = a[B + 1] / cnt[k];
    }
  }

  // Connectivity: split stray components, absorb the ones below S^2/4.
  SegmentMap components = connected_components(label, H, W);
  return absorb_small_segments(components, S * S / 4.0);
}

}  // namespace sps
