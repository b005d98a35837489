#pragma once

// Gaussian-process surrogate with an ARD Matern-5/2 kernel over the unit cube.

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace sgl {

struct MaternKernel {
  Eigen::VectorXd length_scales;
  double signal_variance = 1.0;

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

struct GpObservation {
  Eigen::VectorXd x;  // normalized to [0, 1]^d
  double value = 0.0;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct GpFitOptions {
  int restarts = 3;
  int max_iterations = 300;
  std::uint64_t seed = 0;
  /// Warm start in log space: (log l_1..l_d, log sigma^2, log noise).
  Eigen::VectorXd initial_log_params;
};

/// Fitted posterior. Values are standardized internally; predictions are in
/// the caller's units.
class GpModel {
 public:
  /// Fits with fixed hyperparameters (in standardized units).
  static GpModel condition(std::vector<GpObservation> observations, const MaternKernel& kernel,
                           double noise_variance);

  GpPrediction predict(const Eigen::VectorXd& x) const;
  double log_marginal_likelihood() const { return log_likelihood_; }

  const MaternKernel& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  /// Jitter actually added to the diagonal to make the kernel matrix factorable.
  double jitter() const { return jitter_; }
  const std::vector<GpObservation>& observations() const { return observations_; }
  Eigen::VectorXd log_params() const;

 private:
  std::vector<GpObservation> observations_;
  MaternKernel kernel_;
  double noise_variance_ = 1e-6;
  double jitter_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double log_likelihood_ = 0.0;
};

/// Hyperparameters by maximizing the marginal likelihood with multi-start
/// Nelder-Mead. Needs at least two observations.
GpModel gp_fit(const std::vector<GpObservation>& observations, const GpFitOptions& options = {});

}  // namespace sgl
