#pragma once

// Environment adapter: observation vector, action decoding and the
// velocity/power reward.

#include <deque>
#include <vector>

#include <Eigen/Core>

#include "sgl/simulator.hpp"

namespace sgl::rl {

struct RewardParams {
  double a1 = 0.2;  // velocity error at which the velocity reward reaches zero, m/s
  double a2 = 0.2;  // velocity reward exponent is 1/a2
  double b1 = 0.6;  // power reward exponent is 1/b1^2
};

/// max(0, 1 - |v_target - v| / a1)^(1/a2), in [0, 1].
double velocity_reward(double v_target, double v, const RewardParams& p = {});
/// r_max * (1 - p_hat)^(1/b1^2); p_hat is clamped to [0, 1].
double power_reward(double p_hat, double r_max, const RewardParams& p = {});
/// Power reward with r_max replaced by the velocity reward.
double combined_reward(double v_target, double v, double p_hat, const RewardParams& p = {});

/// [joint angles (8), joint velocities (8), head speed, torques (8), target velocity].
Eigen::VectorXd observe(const SimState& state, const StepInfo& info, double v_target);

/// Linear map of [-1.5, 1.5] onto [-joint_limit, joint_limit]; inputs are clipped first.
std::vector<double> decode_action(const Eigen::VectorXd& action, double joint_limit = 1.5707963267948966);

/// Speed fed to the velocity reward.
enum class RewardVelocity {
  head,  // instantaneous head speed, as observed
  com,   // centre-of-mass displacement over a trailing window / window length
};

class SnakeEnv {
 public:
  explicit SnakeEnv(const RobotModel& model, RewardParams reward = {}, int episode_length = 1000,
                    RewardVelocity reward_velocity = RewardVelocity::com, int velocity_window = 20);

  Eigen::VectorXd reset(double target_velocity);

  struct Transition {
    Eigen::VectorXd obs;
    double reward = 0.0;
    double normalized_power = 0.0;
    double reward_velocity = 0.0;
    bool done = false;      // time limit reached or diverged
    bool diverged = false;
    StepInfo info;
  };

  Transition step(const Eigen::VectorXd& action);

  const SimState& state() const { return state_; }
  int steps() const { return steps_; }
  double target_velocity() const { return target_velocity_; }
  const RobotModel& model() const { return *model_; }

 private:
  const RobotModel* model_;
  Simulator sim_;
  RewardParams reward_;
  int episode_length_;
  RewardVelocity reward_velocity_;
  int velocity_window_;
  std::deque<Vec2> com_history_;
  SimState state_;
  double target_velocity_ = 0.0;
  int steps_ = 0;
};

}  // namespace sgl::rl
