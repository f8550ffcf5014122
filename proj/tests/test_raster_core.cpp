#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "sps/core/absorb.hpp"
#include "sps/core/components.hpp"
#include "sps/core/gaussian.hpp"
#include "sps/core/stats.hpp"
#include "sps/core/types.hpp"
#include "test_util.hpp"

using namespace sps;

namespace {

// Dense 2-D convolution with the truncated normalized Gaussian kernel and
// reflect indexing; the independent reference for gaussian_smooth.
MultiBandImage dense_convolution_oracle(const MultiBandImage& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  MultiBandImage out(img.height, img.width, img.bands);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int b = 0; b < img.bands; ++b) {
        double acc = 0.0;
        for (int dy = -radius; dy <= radius; ++dy)
          for (int dx = -radius; dx <= radius; ++dx) {
            const int sy = reflect_index(y + dy, img.height);
            const int sx = reflect_index(x + dx, img.width);
            acc += k[dy + radius] * k[dx + radius] * img.at(sy, sx, b);
          }
        out.at(y, x, b) = static_cast<float>(acc);
      }
  return out;
}

// Recursive flood fill over same-label 4-neighbors.
void flood(const std::vector<int32_t>& labels, int h, int w, int y, int x,
           int32_t target, int32_t fill, std::vector<int32_t>& out) {
  if (y < 0 || y >= h || x < 0 || x >= w) return;
  const size_t p = static_cast<size_t>(y) * w + x;
  if (out[p] != -1 || labels[p] != target) return;
  out[p] = fill;
  flood(labels, h, w, y, x - 1, target, fill, out);
  flood(labels, h, w, y, x + 1, target, fill, out);
  flood(labels, h, w, y - 1, x, target, fill, out);
  flood(labels, h, w, y + 1, x, target, fill, out);
}

std::vector<int32_t> flood_fill_oracle(const std::vector<int32_t>& labels,
                                       int h, int w) {
  std::vector<int32_t> out(labels.size(), -1);
  int32_t next = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      if (out[p] == -1) flood(labels, h, w, y, x, labels[p], next++, out);
    }
  return out;
}

bool same_partition(const std::vector<int32_t>& a,
                    const std::vector<int32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<int32_t, int32_t> fwd, rev;
  for (size_t i = 0; i < a.size(); ++i) {
    auto [itf, newf] = fwd.try_emplace(a[i], b[i]);
    if (!newf && itf->second != b[i]) return false;
    auto [itr, newr] = rev.try_emplace(b[i], a[i]);
    if (!newr && itr->second != a[i]) return false;
  }
  return true;
}

double band_sum(const MultiBandImage& img, int b) {
  double s = 0.0;
  for (size_t i = 0; i < img.pixel_count(); ++i)
    s += img.data[i * img.bands + b];
  return s;
}

}  // namespace

TEST_CASE("gaussian_smooth: sigma 0 returns the input unchanged") {
  const MultiBandImage img = testutil::random_image(7, 5, 3, 11);
  const MultiBandImage out = gaussian_smooth(img, 0.0);
  REQUIRE(out.data == img.data);
}

TEST_CASE("gaussian_smooth: constant image is a fixed point") {
  MultiBandImage img(6, 9, 2);
  for (float& v : img.data) v = 3.25f;
  const MultiBandImage out = gaussian_smooth(img, 1.7);
  for (float v : out.data) REQUIRE(v == Catch::Approx(3.25f).margin(1e-6));
}

TEST_CASE("gaussian_smooth: impulse matches dense convolution oracle") {
  MultiBandImage img(5, 5, 1);
  img.at(2, 2, 0) = 1.0f;
  const MultiBandImage got = gaussian_smooth(img, 0.5);
  const MultiBandImage want = dense_convolution_oracle(img, 0.5);
  for (size_t i = 0; i < got.data.size(); ++i)
    REQUIRE(got.data[i] == Catch::Approx(want.data[i]).margin(1e-7));
}

TEST_CASE("gaussian_smooth: random images match the dense oracle") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    const MultiBandImage img = testutil::random_image(9, 6, 2, seed);
    const MultiBandImage got = gaussian_smooth(img, 1.2);
    const MultiBandImage want = dense_convolution_oracle(img, 1.2);
    for (size_t i = 0; i < got.data.size(); ++i)
      REQUIRE(got.data[i] == Catch::Approx(want.data[i]).margin(1e-6));
  }
}

TEST_CASE("gaussian_smooth: preserves per-band global sums") {
  for (uint64_t seed : {5u, 6u, 7u, 8u}) {
    const MultiBandImage img = testutil::random_image(16, 13, 3, seed);
    for (double sigma : {0.5, 1.0, 2.5}) {
      const MultiBandImage out = gaussian_smooth(img, sigma);
      for (int b = 0; b < img.bands; ++b) {
        const double before = band_sum(img, b);
        const double after = band_sum(out, b);
        REQUIRE(std::abs(after - before) <= 1e-6 * std::abs(before));
      }
    }
  }
}

TEST_CASE("gaussian_smooth: rejects invalid sigma") {
  const MultiBandImage img = testutil::random_image(3, 3, 1, 1);
  REQUIRE_THROWS_AS(gaussian_smooth(img, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(gaussian_smooth(img, std::nan("")), std::invalid_argument);
}

TEST_CASE("connected_components: uniform field is one segment") {
  const std::vector<int32_t> field{0, 0, 0, 0};
  const SegmentMap out = connected_components(field, 2, 2);
  REQUIRE(out.n_segments == 1);
}

TEST_CASE("connected_components: diagonal pixels are not connected") {
  const std::vector<int32_t> field{0, 1, 1, 0};
  const SegmentMap out = connected_components(field, 2, 2);
  REQUIRE(out.n_segments == 4);
}

TEST_CASE("connected_components: matches recursive flood-fill oracle") {
  for (uint64_t seed : {3u, 14u, 159u}) {
    const std::vector<int32_t> field = testutil::random_labels(16, 16, 3, seed);
    const SegmentMap got = connected_components(field, 16, 16);
    const std::vector<int32_t> want = flood_fill_oracle(field, 16, 16);
    REQUIRE(got.labels == want);  // both number in row-major first-visit order
    REQUIRE(validate_segment_map(got).empty());
  }
}

TEST_CASE("connected_components: output segments are 4-connected (BFS check)") {
  const std::vector<int32_t> field = testutil::random_labels(24, 24, 4, 99);
  const SegmentMap out = connected_components(field, 24, 24);
  REQUIRE(validate_segment_map(out).empty());
}

TEST_CASE("relabel_compact: maps labels to first-occurrence order") {
  const std::vector<int32_t> field{5, 5, 9, 9};
  const SegmentMap out = relabel_compact(field, 2, 2);
  REQUIRE(out.labels == std::vector<int32_t>{0, 0, 1, 1});
  REQUIRE(out.n_segments == 2);
}

TEST_CASE("relabel_compact: already-compact map is unchanged") {
  const std::vector<int32_t> field{0, 1, 1, 2};
  const SegmentMap out = relabel_compact(field, 1, 4);
  REQUIRE(out.labels == field);
}

TEST_CASE("relabel_compact: preserves the partition") {
  for (uint64_t seed : {21u, 22u}) {
    sps::Rng rng(seed);
    std::vector<int32_t> field(64);
    for (int32_t& v : field) v = static_cast<int32_t>(rng.below(1000)) + 17;
    const SegmentMap out = relabel_compact(field, 8, 8);
    REQUIRE(same_partition(field, out.labels));
  }
}

TEST_CASE("segment_stats: constant image collapses all statistics") {
  MultiBandImage img(4, 4, 2);
  for (float& v : img.data) v = 2.0f;
  const SegmentMap seg = connected_components(testutil::random_labels(4, 4, 3, 7), 4, 4);
  const SegmentStats st = segment_stats(img, seg);
  for (int s = 0; s < st.n_segments; ++s)
    for (int b = 0; b < 2; ++b) {
      REQUIRE(st.mean(s, b) == 2.0);
      REQUIRE(st.median(s, b) == 2.0);
    }
}

TEST_CASE("segment_stats: lower median rule") {
  MultiBandImage img(2, 2, 1);
  img.data = {1.0f, 2.0f, 3.0f, 4.0f};
  SegmentMap seg(2, 2);
  seg.n_segments = 1;
  const SegmentStats st = segment_stats(img, seg);
  REQUIRE(st.mean(0, 0) == 2.5);
  REQUIRE(st.median(0, 0) == 2.0);
  REQUIRE(st.counts[0] == 4);
}

TEST_CASE("segment_stats: matches per-segment scan oracle") {
  const MultiBandImage img = testutil::random_image(8, 8, 3, 31);
  const SegmentMap seg = connected_components(testutil::random_labels(8, 8, 4, 32), 8, 8);
  const SegmentStats st = segment_stats(img, seg);

  for (int s = 0; s < seg.n_segments; ++s) {
    for (int b = 0; b < img.bands; ++b) {
      std::vector<double> vals;
      double sum = 0.0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          if (seg.at(y, x) == s) {
            vals.push_back(img.at(y, x, b));
            sum += img.at(y, x, b);
          }
      REQUIRE(st.counts[s] == static_cast<int64_t>(vals.size()));
      REQUIRE(st.sum(s, b) == Catch::Approx(sum).margin(1e-9));
      REQUIRE(st.mean(s, b) == Catch::Approx(sum / vals.size()).margin(1e-12));
      std::sort(vals.begin(), vals.end());
      REQUIRE(st.median(s, b) == vals[(vals.size() - 1) / 2]);
    }
  }
}

TEST_CASE("segment_stats: per-band mass balances against the global sum") {
  const MultiBandImage img = testutil::random_image(12, 9, 4, 77);
  const SegmentMap seg = connected_components(testutil::random_labels(12, 9, 5, 78), 12, 9);
  const SegmentStats st = segment_stats(img, seg);
  int64_t total = 0;
  for (int s = 0; s < st.n_segments; ++s) total += st.counts[s];
  REQUIRE(total == static_cast<int64_t>(img.pixel_count()));
  for (int b = 0; b < img.bands; ++b) {
    double acc = 0.0;
    for (int s = 0; s < st.n_segments; ++s)
      acc += st.mean(s, b) * static_cast<double>(st.counts[s]);
    const double want = band_sum(img, b);
    REQUIRE(std::abs(acc - want) <= 1e-6 * std::abs(want));
  }
}

TEST_CASE("segment_stats: shape mismatch throws") {
  const MultiBandImage img = testutil::random_image(4, 4, 1, 5);
  SegmentMap seg(4, 5);
  seg.n_segments = 1;
  REQUIRE_THROWS_AS(segment_stats(img, seg), std::invalid_argument);
}

TEST_CASE("band_covariance: constant image gives epsilon * I") {
  MultiBandImage img(4, 4, 3);
  for (float& v : img.data) v = 1.5f;
  const CovarianceMatrix cov = band_covariance(img, 0.125);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      REQUIRE(cov.matrix()(i, j) == Catch::Approx(i == j ? 0.125 : 0.0).margin(1e-12));
}

TEST_CASE("band_covariance: perfectly correlated bands") {
  sps::Rng rng(4);
  MultiBandImage img(6, 6, 2);
  for (size_t i = 0; i < img.pixel_count(); ++i) {
    const float v = static_cast<float>(rng.uniform());
    img.data[i * 2] = v;
    img.data[i * 2 + 1] = v;
  }
  const double eps = 1e-9;
  const CovarianceMatrix cov = band_covariance(img, eps);
  REQUIRE(cov.matrix()(0, 1) ==
          Catch::Approx(cov.matrix()(0, 0) - eps).margin(1e-12));
  REQUIRE(cov.matrix()(0, 1) ==
          Catch::Approx(cov.matrix()(1, 1) - eps).margin(1e-12));
}

TEST_CASE("band_covariance: matches two-pass oracle within 1e-9") {
  const MultiBandImage img = testutil::random_image(16, 16, 4, 123);
  const double eps = 1e-8;
  const CovarianceMatrix got = band_covariance(img, eps);

  // Two-pass reference: mean first, then centered outer products.
  const int B = img.bands;
  const size_t n = img.pixel_count();
  std::vector<double> mean(B, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (int b = 0; b < B; ++b) mean[b] += img.data[i * B + b];
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> want(static_cast<size_t>(B) * B, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (int p = 0; p < B; ++p)
      for (int q = 0; q < B; ++q)
        want[static_cast<size_t>(p) * B + q] +=
            (img.data[i * B + p] - mean[p]) * (img.data[i * B + q] - mean[q]);
  for (double& v : want) v /= static_cast<double>(n - 1);

  for (int p = 0; p < B; ++p)
    for (int q = 0; q < B; ++q) {
      const double expected =
          want[static_cast<size_t>(p) * B + q] + (p == q ? eps : 0.0);
      REQUIRE(got.matrix()(p, q) == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("band_covariance: result is positive definite (Cholesky succeeds)") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const MultiBandImage img = testutil::random_image(10, 10, 4, seed);
    REQUIRE_NOTHROW(band_covariance(img));  // scale-aware default epsilon
  }
  // Degenerate: constant image still factorizes under the default epsilon.
  MultiBandImage flat(3, 3, 2);
  for (float& v : flat.data) v = 42.0f;
  REQUIRE_NOTHROW(band_covariance(flat));
}

TEST_CASE("band_covariance: single pixel is rejected") {
  MultiBandImage img(1, 1, 2);
  REQUIRE_THROWS_AS(band_covariance(img, 1e-6), std::invalid_argument);
}

TEST_CASE("absorb_small_segments: undersized segment joins longest border neighbor") {
  // 4x4: segment 1 is a 1-px island inside segment 0; threshold absorbs it.
  std::vector<int32_t> field{0, 0, 0, 0,
                             0, 1, 0, 0,
                             0, 0, 0, 0,
                             2, 2, 2, 2};
  const SegmentMap seg = connected_components(field, 4, 4);
  const SegmentMap out = absorb_small_segments(seg, 2.0);
  REQUIRE(out.n_segments == 2);
  REQUIRE(validate_segment_map(out).empty());
}
