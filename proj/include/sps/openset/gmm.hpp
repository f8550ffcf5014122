#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sps/core/rng.hpp"

namespace sps {

struct GmmComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // full, positive definite after reg_covar
};

/// Gaussian mixture with full covariances fitted by EM.
struct GmmModel {
  int n_components = 0;
  int dim = 0;
  double reg_covar = 1e-6;
  uint64_t seed = 0;
  std::vector<GmmComponent> components;

  // Fit metadata: mean per-sample log-likelihood after every EM iteration.
  std::vector<double> log_likelihood_history;
  bool converged = false;
};

namespace detail {

struct GaussianFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_norm = 0.0;  // -0.5 * (D*log(2pi) + log|Sigma|)

  void compute(const Eigen::MatrixXd& cov) {
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("gmm: component covariance is not positive definite");
    double log_det = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
      log_det += 2.0 * std::log(L(i, i));
    log_norm = -0.5 * (static_cast<double>(cov.rows()) *
                           std::log(2.0 * std::numbers::pi) +
                       log_det);
  }

  double log_density(const Eigen::VectorXd& diff) const {
    const Eigen::VectorXd y = llt.matrixL().solve(diff);
    return log_norm - 0.5 * y.squaredNorm();
  }
};

inline double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

/// Seeded k-means++ choice of initial means (rows of X).
inline std::vector<size_t> kmeanspp_indices(const Eigen::MatrixXd& X, int k,
                                            Rng& rng) {
  const size_t n = static_cast<size_t>(X.rows());
  std::vector<size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(static_cast<size_t>(rng.below(n)));
  Eigen::VectorXd d2 =
      (X.rowwise() - X.row(static_cast<Eigen::Index>(chosen[0])))
          .rowwise()
          .squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    size_t pick;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (size_t i = 0; i < n; ++i) {
        acc += d2[static_cast<Eigen::Index>(i)];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<size_t>(rng.below(n));  // all points coincide
    }
    chosen.push_back(pick);
    const Eigen::VectorXd nd =
        (X.rowwise() - X.row(static_cast<Eigen::Index>(pick)))
            .rowwise()
            .squaredNorm();
    d2 = d2.cwiseMin(nd);
  }
  return chosen;
}

}  // namespace detail

/// Fits a full-covariance Gaussian mixture by EM.
///
/// Initialization: k-means++ means (seeded), one hard assignment round for
/// the starting weights/covariances. E-step responsibilities go through
/// log-sum-exp; the M-step adds reg_covar to every covariance diagonal.
/// Stops when the mean per-sample log-likelihood improves by less than tol.
inline GmmModel fit_gmm(const Eigen::MatrixXd& X, int n_components,
                        double reg_covar = 1e-6, uint64_t seed = 0,
                        int max_iters = 100, double tol = 1e-3) {
  const Eigen::Index N = X.rows(), D = X.cols();
  if (n_components < 1)
    throw std::invalid_argument("fit_gmm: n_components must be >= 1");
  if (N < n_components)
    throw std::invalid_argument("fit_gmm: fewer samples than components");
  if (!(reg_covar > 0.0))
    throw std::invalid_argument("fit_gmm: reg_covar must be positive");
  if (!X.allFinite())
    throw std::invalid_argument("fit_gmm: features must be finite");

  const int M = n_components;
  GmmModel model;
  model.n_components = M;
  model.dim = static_cast<int>(D);
  model.reg_covar = reg_covar;
  model.seed = seed;
  model.components.resize(M);

  // Init: k-means++ means, hard assignment for weights and covariances.
  {
    Rng rng(seed);
    const std::vector<size_t> idx = detail::kmeanspp_indices(X, M, rng);
    for (int m = 0; m < M; ++m)
      model.components[m].mean = X.row(static_cast<Eigen::Index>(idx[m]));

    std::vector<int> assign(static_cast<size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
      int best = 0;
      double best_d = (X.row(i).transpose() - model.components[0].mean).squaredNorm();
      for (int m = 1; m < M; ++m) {
        const double d = (X.row(i).transpose() - model.components[m].mean).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = m;
        }
      }
      assign[static_cast<size_t>(i)] = best;
    }
    std::vector<int64_t> cnt(M, 0);
    for (int a : assign) cnt[a] += 1;
    for (int m = 0; m < M; ++m) {
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
      if (cnt[m] > 0) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(D);
        for (Eigen::Index i = 0; i < N; ++i)
          if (assign[static_cast<size_t>(i)] == m) mu += X.row(i).transpose();
        mu /= static_cast<double>(cnt[m]);
        for (Eigen::Index i = 0; i < N; ++i)
          if (assign[static_cast<size_t>(i)] == m) {
            const Eigen::VectorXd d = X.row(i).transpose() - mu;
            cov.noalias() += d * d.transpose();
          }
        cov /= static_cast<double>(cnt[m]);
        model.components[m].mean = mu;
      }
      cov.diagonal().array() += reg_covar;
      model.components[m].covariance = cov;
      // Empty components keep their k-means++ point with a tiny weight.
      model.components[m].weight =
          (cnt[m] > 0) ? static_cast<double>(cnt[m]) / static_cast<double>(N)
                       : 1.0 / static_cast<double>(N * M);
    }
    double wsum = 0.0;
    for (const auto& c : model.components) wsum += c.weight;
    for (auto& c : model.components) c.weight /= wsum;
  }

  Eigen::MatrixXd log_resp(N, M);
  std::vector<detail::GaussianFactor> factors(M);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iters; ++iter) {
    // E-step.
    for (int m = 0; m < M; ++m) factors[m].compute(model.components[m].covariance);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::VectorXd lp(M);
      for (int m = 0; m < M; ++m)
        lp[m] = std::log(model.components[m].weight) +
                factors[m].log_density(X.row(i).transpose() - model.components[m].mean);
      const double lse = detail::log_sum_exp(lp);
      ll += lse;
      for (int m = 0; m < M; ++m) log_resp(i, m) = lp[m] - lse;
    }
    ll /= static_cast<double>(N);
    model.log_likelihood_history.push_back(ll);

    if (ll - prev_ll < tol && iter > 0) {
      model.converged = true;
      break;
    }
    prev_ll = ll;

    // M-step.
    for (int m = 0; m < M; ++m) {
      double nk = 0.0;
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(D);
      for (Eigen::Index i = 0; i < N; ++i) {
        const double r = std::exp(log_resp(i, m));
        nk += r;
        mu += r * X.row(i).transpose();
      }
      nk = std::max(nk, 10.0 * std::numeric_limits<double>::min());
      mu /= nk;
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(D, D);
      for (Eigen::Index i = 0; i < N; ++i) {
        const double r = std::exp(log_resp(i, m));
        const Eigen::VectorXd d = X.row(i).transpose() - mu;
        cov.noalias() += r * (d * d.transpose());
      }
      cov /= nk;
      cov.diagonal().array() += reg_covar;
      model.components[m].weight = nk / static_cast<double>(N);
      model.components[m].mean = mu;
      model.components[m].covariance = cov;
    }
  }
  return model;
}

/// Per-sample log mixture density, evaluated with log-sum-exp.
inline Eigen::VectorXd gmm_log_likelihood(const GmmModel& model,
                                          const Eigen::MatrixXd& X) {
  if (X.cols() != model.dim)
    throw std::invalid_argument("gmm_log_likelihood: dimension mismatch");
  const int M = model.n_components;
  std::vector<detail::GaussianFactor> factors(M);
  for (int m = 0; m < M; ++m) factors[m].compute(model.components[m].covariance);
  Eigen::VectorXd out(X.rows());
  Eigen::VectorXd lp(M);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int m = 0; m < M; ++m)
      lp[m] = std::log(model.components[m].weight) +
              factors[m].log_density(X.row(i).transpose() - model.components[m].mean);
    out[i] = detail::log_sum_exp(lp);
  }
  return out;
}

}  // namespace sps
