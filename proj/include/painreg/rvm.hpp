#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "painreg/error.hpp"
#include "painreg/provenance.hpp"

namespace painreg {

enum class KernelKind { rbf, linear };

inline std::string kernel_kind_name(KernelKind k) {
  return k == KernelKind::rbf ? "rbf" : "linear";
}

inline KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "rbf") return KernelKind::rbf;
  if (name == "linear") return KernelKind::linear;
  raise(errc::bad_config, "unknown kernel kind: " + name);
}

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double gamma = 1.0;  // RBF width; unused by the linear kernel
  bool include_bias = true;
};

// Per-dimension standardization; constant dimensions pass through unscaled.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X) {
    Standardizer s;
    s.mean = X.colwise().mean();
    s.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double var = (X.col(j).array() - s.mean[j]).square().mean();
      const double sd = std::sqrt(var);
      s.scale[j] = sd < 1e-12 ? 1.0 : sd;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }
};

// K[i,j] = exp(-|x_i - z_j|^2 / (2 gamma^2))
inline Eigen::MatrixXd rbf_kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                                         double gamma) {
  if (X.cols() != Z.cols()) raise(errc::dim_mismatch, "kernel inputs differ in dimensionality");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    raise(errc::bad_input, "kernel width must be finite and positive");
  if (!X.allFinite() || !Z.allFinite()) raise(errc::bad_input, "kernel inputs must be finite");
  const Eigen::VectorXd xn = X.rowwise().squaredNorm();
  const Eigen::VectorXd zn = Z.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * X * Z.transpose());
  d2.colwise() += xn;
  d2.rowwise() += zn.transpose();
  return (d2.array().max(0.0) * (-1.0 / (2.0 * gamma * gamma))).exp();
}

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                                     const KernelSpec& spec) {
  if (spec.kind == KernelKind::rbf) return rbf_kernel_matrix(X, Z, spec.gamma);
  if (X.cols() != Z.cols()) raise(errc::dim_mismatch, "kernel inputs differ in dimensionality");
  return X * Z.transpose();
}

// Median pairwise distance of (standardized) inputs; the usual scale for the
// RBF width grid. Falls back to 1 for coincident data.
inline double median_heuristic_gamma(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) return 1.0;
  const Eigen::Index max_rows = 1024;
  const Eigen::Index stride = n > max_rows ? (n + max_rows - 1) / max_rows : 1;
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < n; i += stride)
    for (Eigen::Index j = i + stride; j < n; j += stride)
      dists.push_back((X.row(i) - X.row(j)).norm());
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  const double med = dists[dists.size() / 2];
  return med > 1e-12 ? med : 1.0;
}

struct Posterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

// Weight posterior for fixed hyperparameters:
//   Sigma = (Phi' Phi / sigma2 + diag(alpha))^-1,  mu = Sigma Phi' y / sigma2
// via Cholesky with an escalating jitter (1e-8 .. 1e-2) on failure.
inline Posterior fixed_alpha_posterior(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& alpha, double sigma2) {
  if (Phi.rows() != y.size() || Phi.cols() != alpha.size())
    raise(errc::dim_mismatch, "design/target/precision sizes disagree");
  if (!(sigma2 > 0.0)) raise(errc::bad_input, "noise variance must be positive");
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0)) raise(errc::bad_input, "precisions must be positive");

  const Eigen::Index m = Phi.cols();
  Eigen::MatrixXd H = Phi.transpose() * Phi / sigma2;
  H.diagonal() += alpha;

  Eigen::LLT<Eigen::MatrixXd> llt(H);
  double jitter = 1e-8;
  while (llt.info() != Eigen::Success && jitter <= 1e-2) {
    Eigen::MatrixXd Hj = H;
    Hj.diagonal().array() += jitter;
    llt.compute(Hj);
    jitter *= 10.0;
  }
  if (llt.info() != Eigen::Success)
    raise(errc::numerical_failure, "posterior system is not positive definite");

  Posterior p;
  p.sigma = llt.solve(Eigen::MatrixXd::Identity(m, m));
  p.mu = p.sigma * (Phi.transpose() * y) / sigma2;
  return p;
}

// L(alpha, sigma2) = -1/2 [ n log 2pi + log|C| + y' C^-1 y ],
// C = sigma2 I + Phi diag(alpha)^-1 Phi'
inline double marginal_log_likelihood(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& alpha, double sigma2) {
  const Eigen::Index n = Phi.rows();
  Eigen::MatrixXd C = Phi * alpha.cwiseInverse().asDiagonal() * Phi.transpose();
  C.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    raise(errc::numerical_failure, "marginal covariance is not positive definite");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = y.dot(llt.solve(y));
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

struct MlGradients {
  Eigen::VectorXd dlog_alpha;  // dL / d log alpha_i
  double dlog_sigma2 = 0.0;    // dL / d log sigma2
};

inline MlGradients marginal_log_likelihood_gradients(const Eigen::MatrixXd& Phi,
                                                     const Eigen::VectorXd& y,
                                                     const Eigen::VectorXd& alpha,
                                                     double sigma2) {
  const Posterior post = fixed_alpha_posterior(Phi, y, alpha, sigma2);
  MlGradients g;
  g.dlog_alpha.resize(alpha.size());
  double gamma_sum = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double sii = post.sigma(i, i);
    g.dlog_alpha[i] = 0.5 * (1.0 - alpha[i] * (post.mu[i] * post.mu[i] + sii));
    gamma_sum += 1.0 - alpha[i] * sii;
  }
  const double resid = (y - Phi * post.mu).squaredNorm();
  g.dlog_sigma2 = 0.5 * (resid / sigma2 + gamma_sum - static_cast<double>(Phi.rows()));
  return g;
}

struct RvmTrainOptions {
  int max_iterations = 500;
  double tolerance = 1e-3;        // convergence on max |delta log alpha|
  double prune_threshold = 1e9;   // alpha above this drops the basis
  double init_alpha = 1e-4;
  double init_noise_fraction = 0.1;  // sigma2 starts at fraction * var(y)
};

struct RvmTrace {
  std::vector<double> log_marginal;  // recorded at the top of each iteration
  std::vector<int> active_count;
};

struct RvmModel {
  KernelSpec kernel;
  Standardizer standardizer;
  Eigen::MatrixXd relevance_vectors;     // standardized training inputs, one row each
  std::vector<int> rv_training_indices;  // rows of the original training matrix
  bool bias_active = true;
  Eigen::VectorXd weights;       // [bias if active] then one per relevance vector
  Eigen::VectorXd alpha;         // matching weights
  Eigen::MatrixXd posterior_cov;
  double sigma2 = 1.0;
  bool degenerate = false;  // all kernel bases pruned; bias-only fallback
  Provenance provenance;

  Eigen::Index input_dim() const { return standardizer.mean.size(); }
  Eigen::Index relevance_count() const { return relevance_vectors.rows(); }
};

namespace detail {

inline Eigen::MatrixXd design_for(const RvmModel& model, const Eigen::MatrixXd& Xs) {
  const Eigen::Index q = Xs.rows();
  const Eigen::Index r = model.relevance_vectors.rows();
  Eigen::MatrixXd Phi(q, (model.bias_active ? 1 : 0) + r);
  Eigen::Index col = 0;
  if (model.bias_active) Phi.col(col++).setOnes();
  if (r > 0) Phi.rightCols(r) = kernel_matrix(Xs, model.relevance_vectors, model.kernel);
  return Phi;
}

inline RvmModel bias_only_model(const KernelSpec& spec, const Standardizer& std_,
                                const Eigen::VectorXd& y, double sigma2) {
  RvmModel m;
  m.kernel = spec;
  m.standardizer = std_;
  m.bias_active = true;
  m.relevance_vectors.resize(0, std_.mean.size());
  const double n = static_cast<double>(y.size());
  m.weights = Eigen::VectorXd::Constant(1, y.mean());
  m.alpha = Eigen::VectorXd::Constant(1, 1e-12);
  m.sigma2 = std::max(sigma2, 1e-12);
  m.posterior_cov = Eigen::MatrixXd::Constant(1, 1, m.sigma2 / n);
  m.degenerate = true;
  return m;
}

}  // namespace detail

// Classic evidence re-estimation (MacKay updates) over the basis
// [1 | K(X, x_j)] with pruning of high-precision bases. Targets are used raw;
// inputs are standardized per dimension before the kernel.
inline RvmModel rvm_train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const KernelSpec& spec, const RvmTrainOptions& opts = {},
                          RvmTrace* trace = nullptr) {
  const Eigen::Index n = X.rows();
  if (n < 2) raise(errc::bad_input, "need at least 2 training rows");
  if (y.size() != n) raise(errc::dim_mismatch, "target count does not match rows");
  if (!X.allFinite() || !y.allFinite()) raise(errc::bad_input, "training data must be finite");

  const Standardizer standardizer = Standardizer::fit(X);
  const Eigen::MatrixXd Xs = standardizer.apply(X);

  const Eigen::Index bias_cols = spec.include_bias ? 1 : 0;
  const Eigen::Index m_total = bias_cols + n;
  Eigen::MatrixXd Phi_full(n, m_total);
  if (bias_cols) Phi_full.col(0).setOnes();
  Phi_full.rightCols(n) = kernel_matrix(Xs, Xs, spec);

  const double var_y = (y.array() - y.mean()).square().mean();
  double sigma2 = std::max(opts.init_noise_fraction * var_y, 1e-6);

  std::vector<int> active(static_cast<size_t>(m_total));
  for (Eigen::Index i = 0; i < m_total; ++i) active[static_cast<size_t>(i)] = static_cast<int>(i);
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(m_total, opts.init_alpha);

  Posterior post;
  bool have_posterior = false;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd Phi(n, m);
    Eigen::VectorXd alpha_active(m);
    for (Eigen::Index c = 0; c < m; ++c) {
      Phi.col(c) = Phi_full.col(active[static_cast<size_t>(c)]);
      alpha_active[c] = alpha[active[static_cast<size_t>(c)]];
    }
    post = fixed_alpha_posterior(Phi, y, alpha_active, sigma2);
    have_posterior = true;
    if (trace) {
      trace->log_marginal.push_back(marginal_log_likelihood(Phi, y, alpha_active, sigma2));
      trace->active_count.push_back(static_cast<int>(m));
    }

    double gamma_sum = 0.0;
    Eigen::VectorXd alpha_new(m);
    double max_delta = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
      const double gamma_c =
          std::clamp(1.0 - alpha_active[c] * post.sigma(c, c), 0.0, 1.0);
      gamma_sum += gamma_c;
      const double mu2 = post.mu[c] * post.mu[c];
      double a = gamma_c < 1e-12 ? opts.prune_threshold * 10.0
                                 : gamma_c / std::max(mu2, 1e-300);
      if (!std::isfinite(a)) a = opts.prune_threshold * 10.0;
      alpha_new[c] = a;
      if (a <= opts.prune_threshold && alpha_active[c] <= opts.prune_threshold)
        max_delta = std::max(max_delta, std::abs(std::log(a) - std::log(alpha_active[c])));
    }

    const double resid = (y - Phi * post.mu).squaredNorm();
    const double dof = static_cast<double>(n) - gamma_sum;
    sigma2 = std::max(resid / std::max(dof, 1e-6), 1e-12);

    std::vector<int> survivors;
    survivors.reserve(active.size());
    for (Eigen::Index c = 0; c < m; ++c) {
      alpha[active[static_cast<size_t>(c)]] = alpha_new[c];
      if (alpha_new[c] <= opts.prune_threshold)
        survivors.push_back(active[static_cast<size_t>(c)]);
    }
    const bool pruned = survivors.size() != active.size();
    active = std::move(survivors);

    if (active.empty()) return detail::bias_only_model(spec, standardizer, y, sigma2);
    if (max_delta < opts.tolerance && !pruned) break;
  }
  (void)have_posterior;

  // final posterior on the surviving set
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd Phi(n, m);
  Eigen::VectorXd alpha_active(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    Phi.col(c) = Phi_full.col(active[static_cast<size_t>(c)]);
    alpha_active[c] = alpha[active[static_cast<size_t>(c)]];
  }
  post = fixed_alpha_posterior(Phi, y, alpha_active, sigma2);

  RvmModel model;
  model.kernel = spec;
  model.standardizer = standardizer;
  model.bias_active = spec.include_bias && !active.empty() && active.front() == 0;
  const Eigen::Index rv_count = m - (model.bias_active ? 1 : 0);
  model.relevance_vectors.resize(rv_count, Xs.cols());
  model.rv_training_indices.reserve(static_cast<size_t>(rv_count));
  Eigen::Index row = 0;
  for (int id : active) {
    if (spec.include_bias && id == 0) continue;
    const Eigen::Index train_row = id - bias_cols;
    model.relevance_vectors.row(row++) = Xs.row(train_row);
    model.rv_training_indices.push_back(static_cast<int>(train_row));
  }
  model.weights = post.mu;
  model.alpha = alpha_active;
  model.posterior_cov = post.sigma;
  model.sigma2 = sigma2;
  model.degenerate = rv_count == 0 && !model.bias_active;
  if (rv_count == 0 && model.bias_active) model.degenerate = false;  // constant fit is valid
  return model;
}

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // predictive, includes the noise floor sigma2
};

inline Prediction rvm_predict(const RvmModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.input_dim())
    raise(errc::dim_mismatch, "query dimensionality " + std::to_string(X.cols()) +
                                  " does not match model dimensionality " +
                                  std::to_string(model.input_dim()));
  if (!X.allFinite()) raise(errc::bad_input, "query must be finite");
  const Eigen::MatrixXd Phi = detail::design_for(model, model.standardizer.apply(X));
  Prediction p;
  if (Phi.cols() == 0) {
    p.mean = Eigen::VectorXd::Zero(X.rows());
    p.variance = Eigen::VectorXd::Constant(X.rows(), model.sigma2);
    return p;
  }
  p.mean = Phi * model.weights;
  p.variance =
      ((Phi * model.posterior_cov).array() * Phi.array()).rowwise().sum().matrix();
  p.variance.array() += model.sigma2;
  return p;
}

}  // namespace painreg
