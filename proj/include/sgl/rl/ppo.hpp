#pragma once

// Proximal policy optimization: rollout storage, generalized advantage
// estimation, the clipped-surrogate loss with its analytic gradient, Adam,
// the training loop with the target-velocity schedule, and deterministic
// policy evaluation.

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgl/energy_metrics.hpp"
#include "sgl/param_search.hpp"
#include "sgl/rl/env.hpp"
#include "sgl/rl/policy.hpp"

namespace sgl::rl {

struct TrainConfig {
  long total_steps = 3'000'000;
  int steps_per_update = 2048;
  int epochs_per_update = 10;
  int minibatch_size = 256;
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double init_log_std = -2.0;
  int episode_length = 1000;
  int warmup_episodes = 100;
  double warmup_velocity = 0.1;
  std::vector<double> velocity_cycle = {0.05, 0.10, 0.15, 0.20, 0.25};
  std::optional<double> fixed_velocity;  // overrides the schedule
  int checkpoint_every = 50;             // updates
  std::string checkpoint_dir;            // empty: no checkpoints
  RewardParams reward;
  RewardVelocity reward_velocity = RewardVelocity::com;
  int velocity_window = 20;  // control steps

  void validate() const;
  int num_updates() const;
};

/// Target velocity for the 0-based episode index.
double scheduled_velocity(const TrainConfig& cfg, long episode);

struct RolloutBatch {
  Eigen::MatrixXd observations;  // obs_dim x n, already standardized
  Eigen::MatrixXd actions;       // act_dim x n, unclipped samples
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  std::vector<char> segment_end;  // last step of an episode or of the batch
  Eigen::VectorXd bootstrap;      // value following a segment end; 0 when terminal

  RolloutBatch() = default;
  RolloutBatch(int obs_dim, int act_dim, int n);
  int size() const { return static_cast<int>(rewards.size()); }
  void validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// GAE over one uninterrupted segment followed by `bootstrap_value`.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, double bootstrap_value,
                      double gamma, double lambda);
/// Fills batch.advantages and batch.returns segment by segment.
void compute_gae(RolloutBatch& batch, double gamma, double lambda);

struct LossWeights {
  double surrogate = 1.0;
  double value = 0.5;
  double entropy = 0.0;
};

struct LossTerms {
  double total = 0.0;      // minimized: -surrogate + value * value_loss - entropy * entropy
  double surrogate = 0.0;  // mean of min(rho A, clip(rho) A)
  double value_loss = 0.0; // mean of (V - R)^2
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Loss over the columns of `obs`; accumulates dtotal/dparams into `grad` if given.
LossTerms ppo_loss(const PolicyNet& net, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns, double clip_epsilon, const LossWeights& weights,
                   PolicyGrad* grad);

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<double>& params, std::span<const double> grad);
  long steps() const { return t_; }

 private:
  double lr_ = 0.0, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct UpdateStats {
  bool aborted = false;
  double loss = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Normalizes the batch advantages, then runs epochs x minibatches of Adam
/// steps. A non-finite loss restores `net` and `adam` and reports `aborted`.
UpdateStats ppo_update(PolicyNet& net, Adam& adam, RolloutBatch& batch, const TrainConfig& cfg,
                       std::mt19937_64& rng);

struct EpisodeLog {
  int update = 0;
  long episode = 0;  // 1-based
  double target_velocity = 0.0;
  double episode_return = 0.0;
  double mean_velocity = 0.0;
  double mean_power = 0.0;
  int steps = 0;
  bool diverged = false;

  static std::string csv_header();
  std::string csv_row() const;
};

struct TrainResult {
  PolicyNet net;
  std::vector<EpisodeLog> episodes;
  std::vector<UpdateStats> updates;
  std::vector<std::string> warnings;
  long steps = 0;
};

struct TrainCallbacks {
  std::function<void(const EpisodeLog&)> on_episode;
  std::function<void(int update, const UpdateStats&)> on_update;
};

TrainResult train(const RobotConfig& config, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainCallbacks& callbacks = {});

/// 0.030, 0.035, ..., 0.250: the interval [0.025, 0.25] at 0.005 without its
/// lower endpoint.
std::vector<double> evaluation_targets();

/// Deterministic rollout with the clipped mean action; throws SimulationDiverged.
EvalResult evaluate_policy_at(const PolicyNet& net, const RobotModel& model, double target_velocity,
                              const RunProtocol& protocol = {});
std::vector<EvalResult> evaluate_policy(const PolicyNet& net, const RobotModel& model,
                                        const std::vector<double>& targets, const RunProtocol& protocol = {},
                                        int workers = 1);

}  // namespace sgl::rl
