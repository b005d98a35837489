#pragma once

// Planar rigid-chain simulator for the wheeled snake.
//
// Generalized coordinates are the chain centre of mass, the head heading and
// the joint angles. Link poses are always derived from these by forward
// kinematics, so neighbouring links meet exactly at their joints. With the
// centre of mass as the translational coordinate the mass matrix is block
// diagonal and internal forces (servos, joint limits) cannot change linear
// momentum.
//
// Each control step runs control_dt / physics_substep semi-implicit Euler
// substeps. Viscous wheel friction and the servo damping term are taken at the
// end-of-substep velocity; Coriolis terms and the servo stiffness term at the
// start. Servo torques are clamped by an active-set loop so the applied torque
// never exceeds force_limit * gear.

#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "sgl/robot.hpp"

namespace sgl {

using Vec2 = Eigen::Vector2d;

struct SimState {
  // Generalized coordinates and rates.
  Vec2 com_position = Vec2::Zero();
  Vec2 com_velocity = Vec2::Zero();
  double head_heading = 0.0;
  double head_heading_rate = 0.0;
  std::vector<double> joint_angles;
  std::vector<double> joint_velocities;
  std::vector<double> applied_torques;  // last substep
  double sim_time = 0.0;

  // Derived per-link quantities, refreshed after every step.
  std::vector<Vec2> link_positions;
  std::vector<double> link_headings;
  std::vector<Vec2> link_velocities;
  std::vector<double> link_angular_velocities;

  bool operator==(const SimState&) const = default;
};

struct StepInfo {
  std::vector<double> torques;           // substep average, N*m
  std::vector<double> joint_velocities;  // substep average, rad/s
  double head_velocity = 0.0;            // |v| of the head link centre at step end
  double instantaneous_power = 0.0;      // sum_j |torques[j] * joint_velocities[j]|
};

struct StraightPose {};
using InitialPose = std::variant<StraightPose, std::vector<double>>;

/// Rest state; the head points along +x with its centre of mass placed so that
/// the chain centre of mass sits at the origin.
SimState reset(const RobotModel& model, const InitialPose& pose = StraightPose{});

/// PD position servo, clamped to +-force_limit * gear.
double servo_torque(double target, double angle, double ang_vel, const RobotConfig& config);

/// Anisotropic viscous wheel friction acting at a link's centre of mass.
Vec2 friction_force(const Vec2& link_velocity, double heading, const RobotConfig& config);

/// Largest distance between the two links' versions of any joint position.
double kinematic_residual(const RobotModel& model, const SimState& state);

/// Sum of m_i v_i over all links.
Vec2 linear_momentum(const RobotModel& model, const SimState& state);

/// Holds per-instance scratch space; one Simulator per thread.
class Simulator {
 public:
  explicit Simulator(const RobotModel& model);

  const RobotModel& model() const { return *model_; }

  /// Advances `state` by one control step toward the joint targets.
  StepInfo step(SimState& state, std::span<const double> targets);

  /// Instantaneous impulse (N*s) applied at the centre of mass of `link`.
  void apply_impulse(SimState& state, int link, const Vec2& impulse);

  /// Recomputes the derived link fields from the generalized coordinates.
  void update_links(SimState& state) const;

 private:
  void substep(SimState& state, std::span<const double> targets);
  void assemble(const SimState& state, double h);
  void link_jacobian(int link);

  const RobotModel* model_;
  int links_;
  int dof_;
  Eigen::VectorXd cos_, sin_, heading_, heading_rate_;
  Eigen::MatrixXd link_matrix_;   // link-space (com, headings) system matrix
  Eigen::VectorXd link_rhs_;
  Eigen::VectorXd link_velocity_;
  Eigen::MatrixXd base_matrix_;   // generalized system before servo terms
  Eigen::VectorXd base_rhs_;
  Eigen::MatrixXd gen_matrix_;    // generalized (com, head heading, joints)
  Eigen::VectorXd gen_rhs_;
  Eigen::VectorXd gen_velocity_;
  Eigen::MatrixXd jacobian_;      // 2 x (2 + links)
  Eigen::MatrixXd pulled_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<int> saturation_;   // -1, 0, +1 per joint
  std::vector<double> torque_;
};

/// Convenience wrapper around Simulator::step for one-off calls.
std::pair<SimState, StepInfo> step(const RobotModel& model, const SimState& state,
                                   std::span<const double> targets);

}  // namespace sgl
