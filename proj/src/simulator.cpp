#include "sgl/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "sgl/errors.hpp"

namespace sgl {
namespace {

bool all_finite(const SimState& s) {
  auto ok = [](double v) { return std::isfinite(v); };
  if (!s.com_position.allFinite() || !s.com_velocity.allFinite()) return false;
  if (!ok(s.head_heading) || !ok(s.head_heading_rate)) return false;
  return std::all_of(s.joint_angles.begin(), s.joint_angles.end(), ok) &&
         std::all_of(s.joint_velocities.begin(), s.joint_velocities.end(), ok);
}

}  // namespace

SimState reset(const RobotModel& model, const InitialPose& pose) {
  const int joints = model.num_joints();
  const double limit = model.config().joint_limit;
  SimState state;
  state.joint_angles.assign(joints, 0.0);
  if (const auto* angles = std::get_if<std::vector<double>>(&pose)) {
    if (static_cast<int>(angles->size()) != joints) {
      throw ValidationError("pose", "expected " + std::to_string(joints) + " joint angles");
    }
    for (int j = 0; j < joints; ++j) {
      const double a = (*angles)[j];
      if (!std::isfinite(a) || std::abs(a) > limit) {
        throw ValidationError("pose", "joint " + std::to_string(j) + " angle outside limits");
      }
      state.joint_angles[j] = a;
    }
  }
  state.joint_velocities.assign(joints, 0.0);
  state.applied_torques.assign(joints, 0.0);
  Simulator(model).update_links(state);
  return state;
}

double servo_torque(double target, double angle, double ang_vel, const RobotConfig& config) {
  const double limit = config.max_torque();
  const double raw = config.servo_kp * (target - angle) - config.servo_kd * ang_vel;
  return std::clamp(raw, -limit, limit);
}

Vec2 friction_force(const Vec2& link_velocity, double heading, const RobotConfig& config) {
  const Vec2 tangent(std::cos(heading), std::sin(heading));
  const Vec2 normal(-tangent.y(), tangent.x());
  const double vt = link_velocity.dot(tangent);
  const double vn = link_velocity.dot(normal);
  return -config.forward_damping_coeff * vt * tangent - config.lateral_friction_coeff * vn * normal;
}

double kinematic_residual(const RobotModel& model, const SimState& state) {
  const double half = model.half_length();
  double worst = 0.0;
  for (int j = 0; j + 1 < model.num_links(); ++j) {
    const double a = state.link_headings[j];
    const double b = state.link_headings[j + 1];
    const Vec2 rear = state.link_positions[j] - half * Vec2(std::cos(a), std::sin(a));
    const Vec2 front = state.link_positions[j + 1] + half * Vec2(std::cos(b), std::sin(b));
    worst = std::max(worst, (rear - front).norm());
  }
  return worst;
}

Vec2 linear_momentum(const RobotModel& model, const SimState& state) {
  Vec2 p = Vec2::Zero();
  for (const Vec2& v : state.link_velocities) p += model.link_mass() * v;
  return p;
}

Simulator::Simulator(const RobotModel& model)
    : model_(&model), links_(model.num_links()), dof_(2 + model.num_links()) {
  cos_.resize(links_);
  sin_.resize(links_);
  heading_.resize(links_);
  heading_rate_.resize(links_);
  link_matrix_.resize(dof_, dof_);
  link_rhs_.resize(dof_);
  gen_matrix_.resize(dof_, dof_);
  gen_rhs_.resize(dof_);
  gen_velocity_.resize(dof_);
  jacobian_.resize(2, dof_);
  pulled_.resize(2, dof_);
  link_velocity_.resize(dof_);
  base_matrix_.resize(dof_, dof_);
  base_rhs_.resize(dof_);
  llt_ = Eigen::LLT<Eigen::MatrixXd>(dof_);
  saturation_.assign(model.num_joints(), 0);
  torque_.assign(model.num_joints(), 0.0);
}

void Simulator::update_links(SimState& state) const {
  const RobotModel& m = *model_;
  state.link_positions.assign(links_, state.com_position);
  state.link_velocities.assign(links_, state.com_velocity);
  state.link_headings.resize(links_);
  state.link_angular_velocities.resize(links_);
  double heading = state.head_heading;
  double rate = state.head_heading_rate;
  for (int k = 0; k < links_; ++k) {
    if (k > 0) {
      heading += state.joint_angles[k - 1];
      rate += state.joint_velocities[k - 1];
    }
    state.link_headings[k] = heading;
    state.link_angular_velocities[k] = rate;
    const Vec2 e(std::cos(heading), std::sin(heading));
    const Vec2 e_perp(-e.y(), e.x());
    for (int i = 0; i < links_; ++i) {
      const double d = m.lever(i, k);
      state.link_positions[i] += d * e;
      state.link_velocities[i] += (d * rate) * e_perp;
    }
  }
}

void Simulator::link_jacobian(int link) {
  jacobian_.setZero();
  jacobian_(0, 0) = 1.0;
  jacobian_(1, 1) = 1.0;
  for (int k = 0; k < links_; ++k) {
    const double d = model_->lever(link, k);
    jacobian_(0, 2 + k) = -d * sin_[k];
    jacobian_(1, 2 + k) = d * cos_[k];
  }
}

void Simulator::assemble(const SimState& state, double h) {
  const RobotModel& m = *model_;
  const RobotConfig& cfg = m.config();
  const Eigen::MatrixXd& gram = m.gram();

  double heading = state.head_heading;
  double rate = state.head_heading_rate;
  for (int k = 0; k < links_; ++k) {
    if (k > 0) {
      heading += state.joint_angles[k - 1];
      rate += state.joint_velocities[k - 1];
    }
    heading_[k] = heading;
    heading_rate_[k] = rate;
    cos_[k] = std::cos(heading);
    sin_[k] = std::sin(heading);
  }

  link_matrix_.setZero();
  link_matrix_(0, 0) = m.total_mass();
  link_matrix_(1, 1) = m.total_mass();
  for (int k = 0; k < links_; ++k) {
    for (int l = 0; l < links_; ++l) {
      link_matrix_(2 + k, 2 + l) = gram(k, l) * (cos_[k] * cos_[l] + sin_[k] * sin_[l]);
    }
    link_matrix_(2 + k, 2 + k) += m.link_inertia();
  }

  link_velocity_ << state.com_velocity, heading_rate_;
  link_rhs_.noalias() = link_matrix_ * link_velocity_;
  for (int k = 0; k < links_; ++k) {
    double coriolis = 0.0;
    for (int l = 0; l < links_; ++l) {
      const double s = sin_[k] * cos_[l] - cos_[k] * sin_[l];
      coriolis += gram(k, l) * s * heading_rate_[l] * heading_rate_[l];
    }
    link_rhs_[2 + k] -= h * coriolis;
  }

  // Wheel friction, implicit in velocity.
  const double ct = cfg.forward_damping_coeff;
  const double cn = cfg.lateral_friction_coeff;
  if (ct > 0.0 || cn > 0.0) {
    Eigen::Matrix2d resist;
    for (int i = 0; i < links_; ++i) {
      const Vec2 t(cos_[i], sin_[i]);
      const Vec2 n(-sin_[i], cos_[i]);
      resist.noalias() = (h * ct) * t * t.transpose() + (h * cn) * n * n.transpose();
      link_jacobian(i);
      pulled_.noalias() = resist * jacobian_;
      link_matrix_.noalias() += jacobian_.transpose() * pulled_;
    }
    for (int k = 0; k < links_; ++k) link_matrix_(2 + k, 2 + k) += h * m.rotational_friction();
  }

  // Change of variables to (com, head heading, joint angles). Link headings
  // are prefix sums of the generalized angles, so the transpose map is a
  // suffix sum over the heading block.
  base_matrix_ = link_matrix_;
  base_rhs_ = link_rhs_;
  for (int r = dof_ - 2; r >= 2; --r) {
    base_matrix_.row(r) += base_matrix_.row(r + 1);
    base_rhs_[r] += base_rhs_[r + 1];
  }
  for (int c = dof_ - 2; c >= 2; --c) base_matrix_.col(c) += base_matrix_.col(c + 1);
}

void Simulator::substep(SimState& state, std::span<const double> targets) {
  const RobotConfig& cfg = model_->config();
  const double h = cfg.physics_substep;
  const double limit = cfg.max_torque();
  const int joints = model_->num_joints();

  assemble(state, h);

  std::fill(saturation_.begin(), saturation_.end(), 0);
  for (int pass = 0; pass <= joints; ++pass) {
    gen_matrix_ = base_matrix_;
    gen_rhs_ = base_rhs_;
    for (int j = 0; j < joints; ++j) {
      const int g = 3 + j;
      if (saturation_[j] == 0) {
        gen_matrix_(g, g) += h * cfg.servo_kd;
        gen_rhs_[g] += h * cfg.servo_kp * (targets[j] - state.joint_angles[j]);
      } else {
        gen_rhs_[g] += h * saturation_[j] * limit;
      }
    }
    llt_.compute(gen_matrix_);
    gen_velocity_ = llt_.solve(gen_rhs_);

    bool clean = true;
    for (int j = 0; j < joints; ++j) {
      if (saturation_[j] != 0) {
        torque_[j] = saturation_[j] * limit;
        continue;
      }
      const double tau =
          cfg.servo_kp * (targets[j] - state.joint_angles[j]) - cfg.servo_kd * gen_velocity_[3 + j];
      if (std::abs(tau) > limit) {
        saturation_[j] = tau > 0.0 ? 1 : -1;
        clean = false;
      }
      torque_[j] = tau;
    }
    if (clean) break;
  }

  state.com_velocity = gen_velocity_.head<2>();
  state.head_heading_rate = gen_velocity_[2];
  state.com_position += h * state.com_velocity;
  state.head_heading += h * state.head_heading_rate;
  for (int j = 0; j < joints; ++j) {
    double& q = state.joint_angles[j];
    double& qd = state.joint_velocities[j];
    qd = gen_velocity_[3 + j];
    q += h * qd;
    if (q > cfg.joint_limit) {
      q = cfg.joint_limit;
      if (qd > 0.0) qd = 0.0;
    } else if (q < -cfg.joint_limit) {
      q = -cfg.joint_limit;
      if (qd < 0.0) qd = 0.0;
    }
    state.applied_torques[j] = torque_[j];
  }
}

StepInfo Simulator::step(SimState& state, std::span<const double> targets) {
  const RobotConfig& cfg = model_->config();
  const int joints = model_->num_joints();
  if (static_cast<int>(targets.size()) != joints) {
    throw ValidationError("targets", "expected " + std::to_string(joints) + " joint targets");
  }
  for (double t : targets) {
    if (!(std::abs(t) <= cfg.joint_limit * (1.0 + 1e-12))) {
      throw ValidationError("targets", "joint target outside limits");
    }
  }
  StepInfo info;
  info.torques.assign(joints, 0.0);
  info.joint_velocities.assign(joints, 0.0);

  const int substeps = cfg.substeps_per_control();
  for (int s = 0; s < substeps; ++s) {
    substep(state, targets);
    if (!all_finite(state)) throw SimulationDiverged(state.sim_time + (s + 1) * cfg.physics_substep);
    for (int j = 0; j < joints; ++j) {
      info.torques[j] += state.applied_torques[j];
      info.joint_velocities[j] += state.joint_velocities[j];
    }
  }
  state.sim_time += cfg.control_dt;
  update_links(state);

  for (int j = 0; j < joints; ++j) {
    info.torques[j] /= substeps;
    info.joint_velocities[j] /= substeps;
    info.instantaneous_power += std::abs(info.torques[j] * info.joint_velocities[j]);
  }
  info.head_velocity = state.link_velocities.front().norm();
  return info;
}

void Simulator::apply_impulse(SimState& state, int link, const Vec2& impulse) {
  if (link < 0 || link >= links_) throw ValidationError("link", "index out of range");
  assemble(state, 0.0);
  link_jacobian(link);
  // Generalized impulse J^T p, mapped through the same suffix sum.
  Eigen::VectorXd generalized = jacobian_.transpose() * impulse;
  for (int r = dof_ - 2; r >= 2; --r) generalized[r] += generalized[r + 1];
  const Eigen::VectorXd dv = base_matrix_.llt().solve(generalized);
  state.com_velocity += dv.head<2>();
  state.head_heading_rate += dv[2];
  for (int j = 0; j < model_->num_joints(); ++j) state.joint_velocities[j] += dv[3 + j];
  update_links(state);
}

std::pair<SimState, StepInfo> step(const RobotModel& model, const SimState& state,
                                   std::span<const double> targets) {
  Simulator sim(model);
  SimState next = state;
  StepInfo info = sim.step(next, targets);
  return {std::move(next), std::move(info)};
}

}  // namespace sgl
