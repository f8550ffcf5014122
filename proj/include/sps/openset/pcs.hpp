#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sps {

/// Probabilistic PCA model: Gaussian N(mean, W W' + noise * I) where W spans
/// the top principal subspace.
struct PcsModel {
  int n_components = 0;  // Q
  int dim = 0;           // D
  Eigen::VectorXd mean;
  Eigen::MatrixXd axes;         // Q x D, orthonormal rows
  Eigen::VectorXd eigenvalues;  // Q, non-increasing
  double noise_variance = 0.0;  // mean of the D-Q discarded eigenvalues
};

/// Centers the data, eigendecomposes the sample covariance (denominator
/// N-1), keeps the top-Q axes/eigenvalues and sets the noise variance to
/// the mean of the discarded spectrum. Axis signs are fixed so the entry
/// of largest magnitude in each axis is positive.
inline PcsModel fit_pcs(const Eigen::MatrixXd& X, int n_components) {
  const Eigen::Index N = X.rows(), D = X.cols();
  if (n_components < 1)
    throw std::invalid_argument("fit_pcs: n_components must be >= 1");
  if (n_components >= D)
    throw std::invalid_argument("fit_pcs: n_components must be < dimension");
  if (N <= n_components)
    throw std::invalid_argument("fit_pcs: needs more samples than components");
  if (!X.allFinite())
    throw std::invalid_argument("fit_pcs: features must be finite");

  const int Q = n_components;
  PcsModel model;
  model.n_components = Q;
  model.dim = static_cast<int>(D);
  model.mean = X.colwise().mean();

  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(N - 1);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("fit_pcs: eigendecomposition failed");
  // Eigen returns eigenvalues ascending; flip to non-increasing.
  const Eigen::VectorXd evals = eig.eigenvalues().reverse();
  const Eigen::MatrixXd evecs = eig.eigenvectors().rowwise().reverse();

  model.eigenvalues = evals.head(Q).cwiseMax(0.0);
  model.axes.resize(Q, D);
  for (int q = 0; q < Q; ++q) {
    Eigen::VectorXd v = evecs.col(q);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    model.axes.row(q) = v.transpose();
  }
  double discarded = 0.0;
  for (Eigen::Index i = Q; i < D; ++i) discarded += std::max(evals[i], 0.0);
  model.noise_variance = discarded / static_cast<double>(D - Q);
  return model;
}

/// Log-density under N(mean, W W' + noise * I), evaluated through the
/// diagonalized Q x Q Woodbury identity:
///   inv(C) = (I - A' diag(1 - noise/eig) A) / noise
///   log|C| = (D-Q) log(noise) + sum(log eig)
/// With zero noise variance, points off the principal subspace score
/// -infinity; points on it score under the Q-dimensional Gaussian in
/// subspace coordinates.
inline Eigen::VectorXd pcs_log_likelihood(const PcsModel& model,
                                          const Eigen::MatrixXd& X) {
  if (X.cols() != model.dim)
    throw std::invalid_argument("pcs_log_likelihood: dimension mismatch");
  const int Q = model.n_components;
  const int D = model.dim;
  const double s2 = model.noise_variance;
  const double log2pi = std::log(2.0 * std::numbers::pi);

  Eigen::VectorXd out(X.rows());
  const bool degenerate = !(s2 > 0.0);

  double log_det = 0.0;
  Eigen::VectorXd factor(Q);  // (eig_q - s2) / eig_q, clamped to [0, 1]
  for (int q = 0; q < Q; ++q) {
    const double ev = model.eigenvalues[q];
    if (!degenerate) {
      log_det += std::log(std::max(ev, s2));
      factor[q] = std::max(ev - s2, 0.0) / std::max(ev, s2);
    }
  }
  if (!degenerate) log_det += static_cast<double>(D - Q) * std::log(s2);

  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd d = X.row(i).transpose() - model.mean;
    const Eigen::VectorXd proj = model.axes * d;  // subspace coordinates
    if (degenerate) {
      const double resid2 = d.squaredNorm() - proj.squaredNorm();
      const double tol = 1e-9 * std::max(1.0, d.squaredNorm());
      if (resid2 > tol) {
        out[i] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double ll = -0.5 * Q * log2pi;
      for (int q = 0; q < Q; ++q) {
        const double ev = std::max(model.eigenvalues[q],
                                   std::numeric_limits<double>::min());
        ll -= 0.5 * (std::log(ev) + proj[q] * proj[q] / ev);
      }
      out[i] = ll;
    } else {
      const double quad =
          (d.squaredNorm() - proj.dot(factor.asDiagonal() * proj)) / s2;
      out[i] = -0.5 * (D * log2pi + log_det + quad);
    }
  }
  return out;
}

}  // namespace sps
