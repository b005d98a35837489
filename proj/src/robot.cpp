#include "sgl/robot.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "sgl/errors.hpp"

namespace sgl {
namespace {

struct Field {
  const char* name;
  std::function<double&(RobotConfig&)> ref;
};

const std::vector<Field>& double_fields() {
  static const std::vector<Field> fields = {
      {"module_length", [](RobotConfig& c) -> double& { return c.module_length; }},
      {"module_width", [](RobotConfig& c) -> double& { return c.module_width; }},
      {"module_height", [](RobotConfig& c) -> double& { return c.module_height; }},
      {"density", [](RobotConfig& c) -> double& { return c.density; }},
      {"joint_limit", [](RobotConfig& c) -> double& { return c.joint_limit; }},
      {"force_limit", [](RobotConfig& c) -> double& { return c.force_limit; }},
      {"gear", [](RobotConfig& c) -> double& { return c.gear; }},
      {"lateral_friction_coeff",
       [](RobotConfig& c) -> double& { return c.lateral_friction_coeff; }},
      {"forward_damping_coeff",
       [](RobotConfig& c) -> double& { return c.forward_damping_coeff; }},
      {"servo_kp", [](RobotConfig& c) -> double& { return c.servo_kp; }},
      {"servo_kd", [](RobotConfig& c) -> double& { return c.servo_kd; }},
      {"physics_substep", [](RobotConfig& c) -> double& { return c.physics_substep; }},
      {"control_dt", [](RobotConfig& c) -> double& { return c.control_dt; }},
      {"max_joint_speed", [](RobotConfig& c) -> double& { return c.max_joint_speed; }},
  };
  return fields;
}

void require_positive(const char* name, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be positive and finite");
}

void require_nonnegative(const char* name, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be non-negative and finite");
}

}  // namespace

int RobotConfig::substeps_per_control() const {
  return static_cast<int>(std::lround(control_dt / physics_substep));
}

void RobotConfig::validate() const {
  if (num_modules < 2) throw ValidationError("num_modules", "need at least 2 modules");
  require_positive("module_length", module_length);
  require_positive("module_width", module_width);
  require_positive("module_height", module_height);
  require_positive("density", density);
  require_positive("joint_limit", joint_limit);
  require_positive("force_limit", force_limit);
  require_positive("gear", gear);
  // Friction and servo gains may be zero (frictionless or limp test rigs).
  require_nonnegative("lateral_friction_coeff", lateral_friction_coeff);
  require_nonnegative("forward_damping_coeff", forward_damping_coeff);
  require_nonnegative("servo_kp", servo_kp);
  require_nonnegative("servo_kd", servo_kd);
  require_positive("physics_substep", physics_substep);
  require_positive("control_dt", control_dt);
  require_positive("max_joint_speed", max_joint_speed);
  if (joint_limit > M_PI) throw ValidationError("joint_limit", "must not exceed pi");
  if (std::abs(gear - 0.5 * module_length) > 1e-12 * module_length) {
    throw ValidationError("gear", "must equal module_length / 2");
  }
  const double ratio = control_dt / physics_substep;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ValidationError("control_dt", "must be an integer multiple of physics_substep");
  }
}

KeyValueConfig RobotConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("num_modules", num_modules);
  RobotConfig copy = *this;
  for (const auto& f : double_fields()) kv.set(f.name, f.ref(copy));
  return kv;
}

RobotConfig RobotConfig::from_kv(const KeyValueConfig& kv, const RobotConfig& base) {
  RobotConfig cfg = base;
  std::set<std::string> known{"num_modules"};
  if (kv.contains("num_modules")) cfg.num_modules = kv.get_int("num_modules");
  for (const auto& f : double_fields()) {
    known.insert(f.name);
    if (kv.contains(f.name)) f.ref(cfg) = kv.get_double(f.name);
  }
  for (const auto& [key, value] : kv.entries()) {
    if (!known.count(key)) throw ValidationError(key, "unknown robot configuration key");
  }
  return cfg;
}

RobotConfig RobotConfig::from_kv(const KeyValueConfig& kv) { return from_kv(kv, RobotConfig{}); }

RobotModel build_robot(const RobotConfig& config) {
  config.validate();
  RobotModel model;
  model.config_ = config;
  const double l = config.module_length;
  const double w = config.module_width;
  model.link_mass_ = config.density * l * w * config.module_height;
  model.link_inertia_ = model.link_mass_ * (l * l + w * w) / 12.0;
  model.rotational_friction_ = config.lateral_friction_coeff * l * l / 12.0;

  // Link i's centre sits behind the head: s_i = s_{i-1} - (l/2)(e_{i-1} + e_i).
  const int n = config.num_modules;
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    chain.row(i) = chain.row(i - 1);
    chain(i, i - 1) -= 0.5 * l;
    chain(i, i) -= 0.5 * l;
  }
  // Identical masses: the chain centre of mass is the plain row average.
  const Eigen::RowVectorXd mean = chain.colwise().mean();
  model.lever_ = chain.rowwise() - mean;
  model.gram_ = model.link_mass_ * model.lever_.transpose() * model.lever_;
  return model;
}

}  // namespace sgl
