#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sps/core/components.hpp"
#include "sps/core/gaussian.hpp"
#include "sps/core/types.hpp"

namespace sps {

struct QuickshiftParams {
  double kernel_size = 5.0;  // density bandwidth
  double max_dist = 10.0;    // link cutoff in joint-feature distance
  double ratio = 1.0;        // band weight vs spatial coordinates, (0, 1]

  void validate() const {
    if (!(kernel_size > 0.0))
      throw std::invalid_argument("quickshift: kernel_size must be positive");
    if (!(max_dist > 0.0))
      throw std::invalid_argument("quickshift: max_dist must be positive");
    if (!(ratio > 0.0) || ratio > 1.0)
      throw std::invalid_argument("quickshift: ratio must be in (0, 1]");
  }
};

/// Mode-seeking superpixels. Every pixel carries the joint feature
/// f(p) = (ratio * bands(p), x, y). The density estimate sums the Gaussian
/// kernel over a square window of radius ceil(3 * kernel_size) with
/// reflect padding, so densities depend on band content only and a constant
/// image makes every pixel a root. Each pixel links to the nearest strictly
/// denser pixel within max_dist (ties: smaller row-major index); forest
/// components become segments, split into 4-connected pieces and compacted.
inline SegmentMap quickshift(const MultiBandImage& img,
                             const QuickshiftParams& params) {
  params.validate();
  const int H = img.height, W = img.width, B = img.bands;
  const size_t n = img.pixel_count();
  const double r = params.ratio;

  // Density pass.
  const int wr = static_cast<int>(std::ceil(3.0 * params.kernel_size));
  const double inv2k2 = 1.0 / (2.0 * params.kernel_size * params.kernel_size);
  std::vector<double> density(n, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int dy = -wr; dy <= wr; ++dy) {
        const int qy = reflect_index(y + dy, H);
        for (int dx = -wr; dx <= wr; ++dx) {
          const int qx = reflect_index(x + dx, W);
          double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
          for (int b = 0; b < B; ++b) {
            const double db = r * (static_cast<double>(img.at(y, x, b)) - img.at(qy, qx, b));
            d2 += db * db;
          }
          acc += std::exp(-d2 * inv2k2);
        }
      }
      density[static_cast<size_t>(y) * W + x] = acc;
    }

  // Parent pass. A link candidate must satisfy the joint-distance cutoff,
  // and the spatial part alone already bounds it, so scanning a window of
  // radius ceil(max_dist) is exact.
  const int pr = static_cast<int>(std::ceil(params.max_dist));
  const double max_d2 = params.max_dist * params.max_dist;
  std::vector<int64_t> parent(n, -1);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const size_t p = static_cast<size_t>(y) * W + x;
      double best_d2 = std::numeric_limits<double>::infinity();
      int64_t best_q = -1;
      const int y0 = std::max(0, y - pr), y1 = std::min(H - 1, y + pr);
      const int x0 = std::max(0, x - pr), x1 = std::min(W - 1, x + pr);
      for (int qy = y0; qy <= y1; ++qy)
        for (int qx = x0; qx <= x1; ++qx) {
          const size_t q = static_cast<size_t>(qy) * W + qx;
          if (q == p || density[q] <= density[p]) continue;
          double d2 = static_cast<double>(qx - x) * (qx - x) +
                      static_cast<double>(qy - y) * (qy - y);
          for (int b = 0; b < B; ++b) {
            const double db = r * (static_cast<double>(img.at(y, x, b)) - img.at(qy, qx, b));
            d2 += db * db;
          }
          if (d2 > max_d2) continue;
          if (d2 < best_d2) {  // row-major scan keeps the first on ties
            best_d2 = d2;
            best_q = static_cast<int64_t>(q);
          }
        }
      parent[p] = best_q;
    }

  // Resolve forest roots. Links always point to strictly denser pixels, so
  // the parent graph is acyclic.
  std::vector<int32_t> root(n, -1);
  std::vector<size_t> chain;
  for (size_t p = 0; p < n; ++p) {
    if (root[p] != -1) continue;
    chain.clear();
    size_t cur = p;
    while (root[cur] == -1 && parent[cur] != -1) {
      chain.push_back(cur);
      cur = static_cast<size_t>(parent[cur]);
    }
    const int32_t lab = (root[cur] != -1) ? root[cur] : static_cast<int32_t>(cur);
    root[cur] = lab;
    for (size_t q : chain) root[q] = lab;
  }

  return connected_components(root, H, W);
}

}  // namespace sps
