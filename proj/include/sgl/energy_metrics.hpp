#pragma once

// Energy and efficiency metrics computed from recorded actuator traces.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgl/robot.hpp"

namespace sgl {

inline constexpr double kGravity = 9.81;

/// Per-step actuator records. Rows are control steps, columns joints.
class PowerTrace {
 public:
  explicit PowerTrace(int joints, double gear) : joints_(joints), gear_(gear) {}

  void append(std::span<const double> torques, std::span<const double> joint_velocities,
              double head_speed);

  int steps() const { return static_cast<int>(head_speeds_.size()); }
  int joints() const { return joints_; }
  double gear() const { return gear_; }

  double torque(int step, int joint) const { return torques_[step * joints_ + joint]; }
  double joint_velocity(int step, int joint) const { return velocities_[step * joints_ + joint]; }
  /// Actuator force; torque = force * gear.
  double force(int step, int joint) const { return torque(step, joint) / gear_; }
  double head_speed(int step) const { return head_speeds_[step]; }

  std::span<const double> torques_row(int step) const {
    return {torques_.data() + step * joints_, static_cast<size_t>(joints_)};
  }
  std::span<const double> velocities_row(int step) const {
    return {velocities_.data() + step * joints_, static_cast<size_t>(joints_)};
  }

 private:
  int joints_;
  double gear_;
  std::vector<double> torques_;
  std::vector<double> velocities_;
  std::vector<double> head_speeds_;
};

struct EvalResult {
  double mean_velocity = 0.0;
  double mean_power = 0.0;
  std::vector<double> per_joint_power;
  std::optional<double> appv;  // empty when mean_velocity <= 0
  std::optional<double> cot;
  int window_steps = 0;

  static std::string csv_header(int joints = 8);
  std::string csv_row() const;
  /// Inverse of csv_row; "nan" in the appv/cot columns means undefined.
  static EvalResult from_csv_fields(std::span<const std::string> fields);
};

/// (1/k) sum_i |tau_j(i) * phidot_j(i)| over steps [first, last).
double joint_avg_power(const PowerTrace& trace, int joint, int first = 0, int last = -1);

/// sum_j |tau_j * phidot_j| for one step.
double total_power(std::span<const double> torques, std::span<const double> joint_velocities);

/// (1/N) sum_j |f_j h_j phidot_j| / (f_max h_j phidot_max), clamped to 1.
/// The gear h_j cancels; `gears` may be empty (uniform gear).
double normalized_power(std::span<const double> forces, std::span<const double> joint_velocities,
                        const RobotConfig& config, std::span<const double> gears = {});

double cost_of_transport(double mean_power, double total_mass, double velocity);
double appv(double mean_power, double velocity);

/// Aggregates the window after `warmup_steps`. `distance` is the displacement
/// covered over that window and `duration` its length in seconds.
EvalResult summarize_run(const PowerTrace& trace, const RobotModel& model, double distance,
                         double duration, int warmup_steps);

}  // namespace sgl
