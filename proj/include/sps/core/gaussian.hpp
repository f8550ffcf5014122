#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sps/core/types.hpp"

namespace sps {

/// Reflect i into [0, n) mirroring at the edges with edge repetition
/// (... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...). This convention preserves the
/// total mass of a band under a normalized symmetric kernel.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

/// Truncated normalized Gaussian kernel with radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Per-band 2-D Gaussian convolution with reflect padding, applied as two
/// separable 1-D passes. sigma == 0 returns the input unchanged.
inline MultiBandImage gaussian_smooth(const MultiBandImage& img, double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0)
    throw std::invalid_argument("gaussian_smooth: sigma must be finite and >= 0");
  if (sigma == 0.0) return img;

  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int H = img.height, W = img.width, B = img.bands;

  std::vector<double> tmp(img.data.size());
  // Horizontal pass.
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int b = 0; b < B; ++b) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int xs = reflect_index(x + k, W);
          acc += kernel[k + radius] * img.at(y, xs, b);
        }
        tmp[(static_cast<size_t>(y) * W + x) * B + b] = acc;
      }
    }
  }
  // Vertical pass.
  MultiBandImage out(H, W, B);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int b = 0; b < B; ++b) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int ys = reflect_index(y + k, H);
          acc += kernel[k + radius] * tmp[(static_cast<size_t>(ys) * W + x) * B + b];
        }
        out.at(y, x, b) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace sps
