#include "sgl/rl/env.hpp"

#include <algorithm>
#include <cmath>

#include "sgl/energy_metrics.hpp"
#include "sgl/errors.hpp"
#include "sgl/rl/policy.hpp"

namespace sgl::rl {

double velocity_reward(double v_target, double v, const RewardParams& p) {
  const double base = std::max(0.0, 1.0 - std::abs(v_target - v) / p.a1);
  return std::pow(base, 1.0 / p.a2);
}

double power_reward(double p_hat, double r_max, const RewardParams& p) {
  const double clamped = std::clamp(p_hat, 0.0, 1.0);
  return r_max * std::pow(1.0 - clamped, 1.0 / (p.b1 * p.b1));
}

double combined_reward(double v_target, double v, double p_hat, const RewardParams& p) {
  return power_reward(p_hat, velocity_reward(v_target, v, p), p);
}

Eigen::VectorXd observe(const SimState& state, const StepInfo& info, double v_target) {
  const int joints = static_cast<int>(state.joint_angles.size());
  if (joints != kActionDim) throw ValidationError("state", "observation layout needs 8 joints");
  Eigen::VectorXd obs(kObservationDim);
  for (int j = 0; j < joints; ++j) {
    obs[j] = state.joint_angles[j];
    obs[8 + j] = state.joint_velocities[j];
    obs[17 + j] = info.torques.empty() ? 0.0 : info.torques[j];
  }
  obs[16] = info.head_velocity;
  obs[25] = v_target;
  return obs;
}

std::vector<double> decode_action(const Eigen::VectorXd& action, double joint_limit) {
  std::vector<double> targets(action.size());
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    targets[i] = std::clamp(action[i], -kActionBound, kActionBound) / kActionBound * joint_limit;
  }
  return targets;
}

SnakeEnv::SnakeEnv(const RobotModel& model, RewardParams reward, int episode_length,
                   RewardVelocity reward_velocity, int velocity_window)
    : model_(&model),
      sim_(model),
      reward_(reward),
      episode_length_(episode_length),
      reward_velocity_(reward_velocity),
      velocity_window_(velocity_window) {
  if (velocity_window < 1) throw ValidationError("velocity_window", "must be positive");
  if (model.num_joints() != kActionDim) throw ValidationError("num_modules", "environment needs 9 modules");
  if (episode_length < 1) throw ValidationError("episode_length", "must be positive");
}

Eigen::VectorXd SnakeEnv::reset(double target_velocity) {
  state_ = sgl::reset(*model_);
  target_velocity_ = target_velocity;
  steps_ = 0;
  com_history_.assign(1, state_.com_position);
  return observe(state_, StepInfo{}, target_velocity_);
}

SnakeEnv::Transition SnakeEnv::step(const Eigen::VectorXd& action) {
  const RobotConfig& cfg = model_->config();
  Transition t;
  ++steps_;
  try {
    t.info = sim_.step(state_, decode_action(action, cfg.joint_limit));
  } catch (const SimulationDiverged&) {
    t.done = true;
    t.diverged = true;
    t.obs = Eigen::VectorXd::Zero(kObservationDim);
    return t;
  }
  std::vector<double> forces(t.info.torques.size());
  for (std::size_t j = 0; j < forces.size(); ++j) forces[j] = t.info.torques[j] / cfg.gear;
  t.normalized_power = normalized_power(forces, t.info.joint_velocities, cfg);
  com_history_.push_back(state_.com_position);
  if (static_cast<int>(com_history_.size()) > velocity_window_ + 1) com_history_.pop_front();
  const double span = static_cast<double>(com_history_.size() - 1) * cfg.control_dt;
  t.reward_velocity = reward_velocity_ == RewardVelocity::head
                          ? t.info.head_velocity
                          : (state_.com_position - com_history_.front()).norm() / span;
  t.reward = combined_reward(target_velocity_, t.reward_velocity, t.normalized_power, reward_);
  t.obs = observe(state_, t.info, target_velocity_);
  t.done = steps_ >= episode_length_;
  return t;
}

}  // namespace sgl::rl
