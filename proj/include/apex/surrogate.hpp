#pragma once

// Gaussian-process regression over the unit-cube coordinates of a
// ParameterSpace. Hyperparameters are fixed; targets are standardized before
// fitting and predictions are returned in the original units.

#include "apex/domain.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace apex {

enum class KernelKind { rbf, matern52 };

struct KernelConfig {
  KernelKind kind = KernelKind::rbf;
  double length_scale = 1.0;
  double signal_variance = 1.0;
  /// Observation noise on the standardized scale.
  double noise_variance = 0.1;
  double jitter = 1e-8;

  void validate() const {
    if (!(length_scale > 0.0)) throw std::invalid_argument("kernel length_scale must be positive");
    if (!(signal_variance > 0.0)) throw std::invalid_argument("kernel signal_variance must be positive");
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("kernel noise_variance must be non-negative");
    if (!(jitter > 0.0)) throw std::invalid_argument("kernel jitter must be positive");
  }
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
Scalar kernel(const KernelConfig& cfg, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& u,
              const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& v) {
  const Scalar ell = static_cast<Scalar>(cfg.length_scale);
  const Scalar sf2 = static_cast<Scalar>(cfg.signal_variance);
  const Scalar r2 = (u - v).squaredNorm();
  if (cfg.kind == KernelKind::rbf) return sf2 * std::exp(-r2 / (Scalar(2) * ell * ell));
  const Scalar r = std::sqrt(Scalar(5) * r2) / ell;
  return sf2 * (Scalar(1) + r + r * r / Scalar(3)) * std::exp(-r);
}

inline double kernel(const KernelConfig& cfg, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return kernel<double>(cfg, u, v);
}

/// Covariance between every column of `a` and every column of `b`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_matrix(
    const KernelConfig& cfg, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < a.cols(); ++i) k(i, j) = kernel<Scalar>(cfg, a.col(i), b.col(j));
  return k;
}

template <typename Scalar>
struct Prediction {
  Scalar mean;
  Scalar variance;
  Scalar stddev() const { return std::sqrt(variance); }
};

/// Fitted GP. Immutable once constructed.
template <typename Scalar>
class GaussianProcess {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// `inputs` holds one training point per column.
  GaussianProcess(const KernelConfig& cfg, Matrix inputs, const Vector& targets)
      : cfg_(cfg), inputs_(std::move(inputs)) {
    cfg_.validate();
    if (inputs_.cols() == 0) throw FitError("cannot fit a GP without observations");
    if (targets.size() != inputs_.cols()) throw std::invalid_argument("GP inputs and targets differ in length");

    mean_ = targets.mean();
    const Scalar var = (targets.array() - mean_).square().mean();
    std_ = var > Scalar(0) ? std::sqrt(var) : Scalar(1);
    standardized_ = (targets.array() - mean_) / std_;

    Matrix k = kernel_matrix<Scalar>(cfg_, inputs_, inputs_);
    Scalar jitter = static_cast<Scalar>(cfg_.jitter);
    const Scalar noise = static_cast<Scalar>(cfg_.noise_variance);
    for (;;) {
      Matrix kn = k;
      kn.diagonal().array() += noise + jitter;
      llt_.compute(kn);
      if (llt_.info() == Eigen::Success) break;
      jitter *= Scalar(10);
      if (jitter > Scalar(1e-4) * Scalar(1.0000001))
        throw FitError("covariance matrix is not positive definite even with jitter 1e-4 (degenerate data)");
    }
    weights_ = llt_.solve(standardized_);
  }

  Prediction<Scalar> predict(const Eigen::Ref<const Vector>& x) const {
    Vector kx(inputs_.cols());
    for (Eigen::Index i = 0; i < inputs_.cols(); ++i) kx(i) = kernel<Scalar>(cfg_, inputs_.col(i), x);
    const Scalar mu = kx.dot(weights_);
    const Vector v = llt_.matrixL().solve(kx);
    const Scalar var = std::max(kernel<Scalar>(cfg_, x, x) - v.squaredNorm(), Scalar(0));
    return {mean_ + std_ * mu, std_ * std_ * var};
  }

  /// Predictions for every column of `points`.
  std::pair<Vector, Vector> predict_all(const Matrix& points) const {
    const Matrix kx = kernel_matrix<Scalar>(cfg_, inputs_, points);
    Vector mu = kx.transpose() * weights_;
    const Matrix v = llt_.matrixL().solve(kx);
    Vector var(points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const Scalar prior = kernel<Scalar>(cfg_, points.col(j), points.col(j));
      var(j) = std::max(prior - v.col(j).squaredNorm(), Scalar(0));
    }
    mu = (mu.array() * std_ + mean_).matrix();
    var *= std_ * std_;
    return {mu, var};
  }

  const KernelConfig& config() const { return cfg_; }
  const Matrix& inputs() const { return inputs_; }
  const Vector& standardized_targets() const { return standardized_; }
  Scalar target_mean() const { return mean_; }
  Scalar target_std() const { return std_; }
  /// Lower-triangular factor of K + (noise + jitter) I.
  Matrix factor() const { return llt_.matrixL(); }

 private:
  KernelConfig cfg_;
  Matrix inputs_;
  Vector standardized_;
  Scalar mean_ = 0;
  Scalar std_ = 1;
  Eigen::LLT<Matrix> llt_;
  Vector weights_;
};

using GpModel = GaussianProcess<double>;

/// Posterior mean and standard deviation at every set of a space.
struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

/// Fits a GP to every observation of `metric` in `history`, each value
/// multiplied by `sign` (use the requirement's canonical sign).
inline GpModel fit(const ParameterSpace& space, const History& history, const std::string& metric,
                   const KernelConfig& cfg, double sign = 1.0) {
  if (history.empty()) throw FitError("cannot fit '" + metric + "' without observations");
  const auto n = static_cast<Eigen::Index>(history.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(space.dimensions()), n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = history[static_cast<std::size_t>(i)];
    x.col(i) = space.normalized(obs.set_index);
    y(i) = sign * obs.metric(metric);
  }
  return GpModel(cfg, std::move(x), y);
}

inline Prediction<double> predict(const GpModel& model, const ParameterSpace& space, SetIndex set) {
  return model.predict(space.normalized(set));
}

inline Posterior posterior(const GpModel& model, const ParameterSpace& space) {
  auto [mu, var] = model.predict_all(space.coordinates());
  return {std::move(mu), var.array().sqrt().matrix()};
}

}  // namespace apex
