#pragma once

// Gaussian policy with separate ReLU trunks for the action mean and the state
// value, a state-independent log standard deviation, and running observation
// standardization.

#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgl/rl/mlp.hpp"

namespace sgl::rl {

inline constexpr int kObservationDim = 26;
inline constexpr int kActionDim = 8;
inline constexpr int kHiddenWidth = 200;
inline constexpr double kActionBound = 1.5;

/// Running mean/variance (Welford) used to standardize observations.
class ObsNormalizer {
 public:
  ObsNormalizer() = default;
  explicit ObsNormalizer(int dim);

  void update(const Eigen::VectorXd& obs);
  /// (obs - mean) / sqrt(var + eps), clipped to +-10. Identity before any update.
  Eigen::VectorXd normalize(const Eigen::VectorXd& obs) const;

  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd variance() const;
  /// Sum of squared deviations from the running mean.
  const Eigen::VectorXd& sum_squares() const { return m2_; }

  void restore(double count, Eigen::VectorXd mean, Eigen::VectorXd sum_squares);
  bool operator==(const ObsNormalizer&) const = default;

 private:
  double count_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

struct PolicyNet {
  Mlp policy;  // obs -> action mean
  Mlp value;   // obs -> scalar value
  Eigen::VectorXd log_std;
  ObsNormalizer normalizer;

  /// Randomly initialized network; hidden = {200, 200} by default.
  static PolicyNet create(std::mt19937_64& rng, int obs_dim = kObservationDim, int act_dim = kActionDim,
                          std::vector<int> hidden = {kHiddenWidth, kHiddenWidth}, double init_log_std = -0.5);
  /// All weights, biases and log-stds zero.
  static PolicyNet zeros(int obs_dim = kObservationDim, int act_dim = kActionDim,
                         std::vector<int> hidden = {kHiddenWidth, kHiddenWidth});

  int obs_dim() const { return policy.sizes().front(); }
  int act_dim() const { return policy.sizes().back(); }

  /// Flattened in checkpoint order: policy layers (weights row-major, then
  /// bias), value layers, log_std.
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> flat);
  std::size_t parameter_count() const;
};

struct PolicyGrad {
  std::vector<DenseLayer> policy;
  std::vector<DenseLayer> value;
  Eigen::VectorXd log_std;

  static PolicyGrad zeros_like(const PolicyNet& net);
  std::vector<double> flat() const;
};

struct PolicyOutput {
  Eigen::VectorXd mean;
  double value = 0.0;
};

/// Standardizes `obs` with the net's normalizer, then runs both trunks.
PolicyOutput policy_forward(const PolicyNet& net, const Eigen::VectorXd& obs);
/// Same, for an already-standardized observation.
PolicyOutput policy_forward_normalized(const PolicyNet& net, const Eigen::VectorXd& obs);

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& sample);
/// Sum over dimensions of the per-dimension Gaussian entropy.
double gaussian_entropy(const Eigen::VectorXd& log_std);

struct SampledAction {
  Eigen::VectorXd action;  // clipped to +-kActionBound
  Eigen::VectorXd raw;     // unclipped Gaussian draw
  double log_prob = 0.0;   // of `raw`
};

SampledAction sample_action(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, std::mt19937_64& rng);

Eigen::VectorXd clip_action(const Eigen::VectorXd& a);

/// Binary checkpoint, little-endian: "SGL1"; per trunk (policy, value) a uint32
/// layer count and uint32 widths; flat_params() as float64; then the
/// normalizer's count, mean and sum of squared deviations as float64.
void save_checkpoint(const PolicyNet& net, const std::string& path);
PolicyNet load_checkpoint(const std::string& path);

}  // namespace sgl::rl
