#include "sgl/energy_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgl/errors.hpp"
#include "sgl/kv_config.hpp"

namespace sgl {

void PowerTrace::append(std::span<const double> torques, std::span<const double> joint_velocities,
                        double head_speed) {
  if (static_cast<int>(torques.size()) != joints_ ||
      static_cast<int>(joint_velocities.size()) != joints_) {
    throw ValidationError("trace", "row width does not match joint count");
  }
  torques_.insert(torques_.end(), torques.begin(), torques.end());
  velocities_.insert(velocities_.end(), joint_velocities.begin(), joint_velocities.end());
  head_speeds_.push_back(head_speed);
}

double joint_avg_power(const PowerTrace& trace, int joint, int first, int last) {
  if (joint < 0 || joint >= trace.joints()) {
    throw std::out_of_range("joint index " + std::to_string(joint) + " out of range");
  }
  if (last < 0) last = trace.steps();
  if (first < 0 || first >= last || last > trace.steps()) {
    throw ValidationError("window", "empty or out-of-range step window");
  }
  double sum = 0.0;
  for (int i = first; i < last; ++i) {
    sum += std::abs(trace.torque(i, joint) * trace.joint_velocity(i, joint));
  }
  return sum / (last - first);
}

double total_power(std::span<const double> torques, std::span<const double> joint_velocities) {
  if (torques.size() != joint_velocities.size()) {
    throw ValidationError("joint_velocities", "length differs from torques");
  }
  double p = 0.0;
  for (size_t j = 0; j < torques.size(); ++j) p += std::abs(torques[j] * joint_velocities[j]);
  return p;
}

double normalized_power(std::span<const double> forces, std::span<const double> joint_velocities,
                        const RobotConfig& config, std::span<const double> gears) {
  if (forces.size() != joint_velocities.size() || forces.empty()) {
    throw ValidationError("joint_velocities", "length differs from forces");
  }
  if (!gears.empty() && gears.size() != forces.size()) {
    throw ValidationError("gears", "length differs from forces");
  }
  double sum = 0.0;
  for (size_t j = 0; j < forces.size(); ++j) {
    const double h = gears.empty() ? config.gear : gears[j];
    sum += std::abs(forces[j] * h * joint_velocities[j]) /
           (config.force_limit * h * config.max_joint_speed);
  }
  return std::min(1.0, sum / static_cast<double>(forces.size()));
}

double cost_of_transport(double mean_power, double total_mass, double velocity) {
  if (!(velocity > 0.0)) throw UndefinedMetric("cost of transport needs positive velocity");
  if (!(total_mass > 0.0)) throw ValidationError("total_mass", "must be positive");
  return mean_power / (total_mass * kGravity * velocity);
}

double appv(double mean_power, double velocity) {
  if (!(velocity > 0.0)) throw UndefinedMetric("APPV needs positive velocity");
  return mean_power / velocity;
}

EvalResult summarize_run(const PowerTrace& trace, const RobotModel& model, double distance,
                         double duration, int warmup_steps) {
  const int k = trace.steps();
  if (warmup_steps < 0 || k <= warmup_steps) {
    throw ValidationError("warmup_steps", "trace has " + std::to_string(k) +
                                              " steps, not more than warmup " +
                                              std::to_string(warmup_steps));
  }
  if (!(duration > 0.0)) throw ValidationError("duration", "must be positive");

  EvalResult r;
  r.window_steps = k - warmup_steps;
  r.per_joint_power.resize(trace.joints());
  for (int j = 0; j < trace.joints(); ++j) {
    r.per_joint_power[j] = joint_avg_power(trace, j, warmup_steps, k);
  }
  double power = 0.0;
  for (int i = warmup_steps; i < k; ++i) power += total_power(trace.torques_row(i), trace.velocities_row(i));
  r.mean_power = power / r.window_steps;
  r.mean_velocity = distance / duration;
  if (r.mean_velocity > 0.0) {
    r.appv = appv(r.mean_power, r.mean_velocity);
    r.cot = cost_of_transport(r.mean_power, model.total_mass(), r.mean_velocity);
  }
  return r;
}

std::string EvalResult::csv_header(int joints) {
  std::string h = "velocity,power,appv,cot";
  for (int j = 1; j <= joints; ++j) h += ",joint" + std::to_string(j) + "_power";
  return h;
}

std::string EvalResult::csv_row() const {
  std::string row = format_double(mean_velocity) + "," + format_double(mean_power) + "," +
                    (appv ? format_double(*appv) : "nan") + "," + (cot ? format_double(*cot) : "nan");
  for (double p : per_joint_power) row += "," + format_double(p);
  return row;
}

EvalResult EvalResult::from_csv_fields(std::span<const std::string> fields) {
  if (fields.size() < 4) throw ValidationError("csv", "EvalResult row needs at least 4 columns");
  auto num = [](const std::string& s) {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ValidationError("csv", "bad number '" + s + "'");
    return v;
  };
  EvalResult r;
  r.mean_velocity = num(fields[0]);
  r.mean_power = num(fields[1]);
  if (fields[2] != "nan") r.appv = num(fields[2]);
  if (fields[3] != "nan") r.cot = num(fields[3]);
  for (size_t i = 4; i < fields.size(); ++i) r.per_joint_power.push_back(num(fields[i]));
  return r;
}

}  // namespace sgl
