#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sps/core/types.hpp"

namespace sps {

/// Exact per-segment pixel counts, per-band sums, means and medians.
/// Medians are the lower median for even-sized segments.
struct SegmentStats {
  int n_segments = 0;
  int bands = 0;
  std::vector<int64_t> counts;   // [seg]
  std::vector<double> sums;      // [seg * bands + b]
  std::vector<double> means;     // [seg * bands + b]
  std::vector<double> medians;   // [seg * bands + b]

  double mean(int seg, int b) const { return means[static_cast<size_t>(seg) * bands + b]; }
  double median(int seg, int b) const { return medians[static_cast<size_t>(seg) * bands + b]; }
  double sum(int seg, int b) const { return sums[static_cast<size_t>(seg) * bands + b]; }
};

/// Lower median of v: the element at index (n-1)/2 of the sorted sequence.
inline double lower_median(std::vector<double>& v) {
  const size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

inline SegmentStats segment_stats(const MultiBandImage& img,
                                  const SegmentMap& seg) {
  require_same_shape(img.height, img.width, seg.height, seg.width,
                     "segment_stats");
  const int B = img.bands;
  const int K = seg.n_segments;
  SegmentStats st;
  st.n_segments = K;
  st.bands = B;
  st.counts.assign(K, 0);
  st.sums.assign(static_cast<size_t>(K) * B, 0.0);
  st.means.assign(static_cast<size_t>(K) * B, 0.0);
  st.medians.assign(static_cast<size_t>(K) * B, 0.0);

  const size_t n = img.pixel_count();
  for (size_t i = 0; i < n; ++i) {
    const int32_t s = seg.labels[i];
    st.counts[s] += 1;
    for (int b = 0; b < B; ++b)
      st.sums[static_cast<size_t>(s) * B + b] += img.data[i * B + b];
  }
  for (int s = 0; s < K; ++s)
    for (int b = 0; b < B; ++b)
      st.means[static_cast<size_t>(s) * B + b] =
          st.sums[static_cast<size_t>(s) * B + b] / static_cast<double>(st.counts[s]);

  // Bucket pixel indices per segment, then take per-band medians.
  std::vector<size_t> offsets(K + 1, 0);
  for (int s = 0; s < K; ++s) offsets[s + 1] = offsets[s] + static_cast<size_t>(st.counts[s]);
  std::vector<size_t> bucket(n);
  std::vector<size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (size_t i = 0; i < n; ++i) bucket[cursor[seg.labels[i]]++] = i;

  std::vector<double> vals;
  for (int s = 0; s < K; ++s) {
    const size_t lo = offsets[s], hi = offsets[s + 1];
    for (int b = 0; b < B; ++b) {
      vals.clear();
      vals.reserve(hi - lo);
      for (size_t j = lo; j < hi; ++j) vals.push_back(img.data[bucket[j] * B + b]);
      st.medians[static_cast<size_t>(s) * B + b] = lower_median(vals);
    }
  }
  return st;
}

/// Symmetric B x B covariance with an epsilon added to the diagonal;
/// positive definite after regularization (the Cholesky factor is cached
/// for repeated Mahalanobis evaluations).
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  CovarianceMatrix(Eigen::MatrixXd m, double epsilon)
      : mat_(std::move(m)), epsilon_(epsilon) {
    if (mat_.rows() != mat_.cols())
      throw std::invalid_argument("CovarianceMatrix: matrix must be square");
    mat_.diagonal().array() += epsilon_;
    llt_.compute(mat_);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error(
          "CovarianceMatrix: Cholesky factorization failed (matrix not "
          "positive definite)");
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  double epsilon() const { return epsilon_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }

  /// sqrt(d' * inv(cov) * d) through the cached Cholesky factor.
  double mahalanobis(const Eigen::VectorXd& d) const {
    if (d.size() != mat_.rows())
      throw std::invalid_argument("CovarianceMatrix: dimension mismatch");
    const Eigen::VectorXd y = llt_.matrixL().solve(d);
    return y.norm();
  }

 private:
  Eigen::MatrixXd mat_;
  double epsilon_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Scale-aware default regularization: 1e-6 * trace/B, floored so that a
/// constant image still yields a positive definite matrix.
inline double default_covariance_epsilon(double trace, int bands) {
  const double eps = 1e-6 * trace / static_cast<double>(bands);
  return std::max(eps, 1e-12);
}

/// Sample covariance (denominator N-1) over all pixels plus epsilon * I.
/// Accumulates sums and outer products in one pass.
inline CovarianceMatrix band_covariance(const MultiBandImage& img,
                                        double epsilon) {
  const size_t n = img.pixel_count();
  if (n < 2)
    throw std::invalid_argument("band_covariance: needs at least 2 pixels");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("band_covariance: epsilon must be positive");
  const int B = img.bands;

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(B);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(B, B);
  Eigen::VectorXd x(B);
  for (size_t i = 0; i < n; ++i) {
    for (int b = 0; b < B; ++b) x[b] = img.data[i * B + b];
    sum += x;
    outer.noalias() += x * x.transpose();
  }
  const double N = static_cast<double>(n);
  const Eigen::VectorXd mean = sum / N;
  Eigen::MatrixXd cov = (outer - N * mean * mean.transpose()) / (N - 1.0);
  cov = 0.5 * (cov + cov.transpose());  // keep exactly symmetric
  return CovarianceMatrix(std::move(cov), epsilon);
}

/// band_covariance with the scale-aware default epsilon.
inline CovarianceMatrix band_covariance(const MultiBandImage& img) {
  const size_t n = img.pixel_count();
  if (n < 2)
    throw std::invalid_argument("band_covariance: needs at least 2 pixels");
  const int B = img.bands;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(B);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(B);
  for (size_t i = 0; i < n; ++i)
    for (int b = 0; b < B; ++b) {
      const double v = img.data[i * B + b];
      sum[b] += v;
      sq[b] += v * v;
    }
  const double N = static_cast<double>(n);
  double trace = 0.0;
  for (int b = 0; b < B; ++b)
    trace += (sq[b] - sum[b] * sum[b] / N) / (N - 1.0);
  return band_covariance(img, default_covariance_epsilon(std::max(trace, 0.0), B));
}

}  // namespace sps
