#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgl/kv_config.hpp"

namespace sgl {

/// Physical description of the planar snake chain. Field names double as the
/// keys of the key-value configuration format.
struct RobotConfig {
  int num_modules = 9;
  double module_length = 0.35;   // m
  double module_width = 0.10;    // m
  double module_height = 0.05;   // m
  double density = 600.0;        // kg/m^3
  double joint_limit = 1.5707963267948966;  // rad, symmetric
  double force_limit = 20.0;     // N
  double gear = 0.175;           // m, half a module length
  double lateral_friction_coeff = 30.0;  // N*s/m per link
  double forward_damping_coeff = 0.3;    // N*s/m per link
  double servo_kp = 60.0;        // N*m/rad
  double servo_kd = 3.0;         // N*m*s/rad
  double physics_substep = 0.005;  // s
  double control_dt = 0.05;        // s
  double max_joint_speed = 6.0;    // rad/s, power normalization only

  int num_joints() const { return num_modules - 1; }
  double max_torque() const { return force_limit * gear; }
  int substeps_per_control() const;

  /// Throws ValidationError naming the first offending field.
  void validate() const;

  KeyValueConfig to_kv() const;
  /// Starts from `base` and overrides every key present in `kv`. Unknown keys
  /// are rejected.
  static RobotConfig from_kv(const KeyValueConfig& kv, const RobotConfig& base);
  static RobotConfig from_kv(const KeyValueConfig& kv);
};

/// Immutable, precomputed chain model. Safe to share across threads.
class RobotModel {
 public:
  const RobotConfig& config() const { return config_; }
  int num_links() const { return config_.num_modules; }
  int num_joints() const { return config_.num_modules - 1; }

  double link_mass() const { return link_mass_; }
  double link_inertia() const { return link_inertia_; }
  double total_mass() const { return link_mass_ * num_links(); }
  double half_length() const { return 0.5 * config_.module_length; }
  /// Lateral friction distributed along a link resists spinning about its centre.
  double rotational_friction() const { return rotational_friction_; }

  /// d(i, k): coefficient of heading-rate k in the COM-relative velocity of
  /// link i, along the perpendicular of heading k.
  double lever(int link, int heading) const { return lever_(link, heading); }
  /// Sum_i m_i d(i,k) d(i,l); the heading-space mass matrix is
  /// gram(k,l) cos(theta_k - theta_l) + delta_kl * inertia.
  const Eigen::MatrixXd& gram() const { return gram_; }

 private:
  friend RobotModel build_robot(const RobotConfig& config);

  RobotConfig config_;
  double link_mass_ = 0.0;
  double link_inertia_ = 0.0;
  double rotational_friction_ = 0.0;
  Eigen::MatrixXd lever_;
  Eigen::MatrixXd gram_;
};

RobotModel build_robot(const RobotConfig& config);

}  // namespace sgl
