#pragma once

#include <string>
#include <vector>

#include "sgl/kv_config.hpp"

namespace sgl {

/// Parameters of the travelling-wave gait equation
///   phi(n, t) = (n/N * x + y) * A * sin(omega * t + lambda * n).
/// Angles are stored in degrees; lambda is a phase offset per joint index.
struct GaitParams {
  double omega = 1.0;          // rad/s
  double y = 0.3;              // offset of the linear amplitude envelope
  double x = 0.7;              // slope of the envelope, always 1 - y
  double amplitude_deg = 60.0;
  double lambda_deg = 60.0;

  /// Validated construction; sets x = 1 - y.
  static GaitParams make(double omega, double y, double amplitude_deg, double lambda_deg);
  void validate() const;

  KeyValueConfig to_kv() const;
  static GaitParams from_kv(const KeyValueConfig& kv);

  static std::string csv_header() { return "omega,y,amplitude_deg,lambda_deg"; }
  std::string csv_row() const;

  bool operator==(const GaitParams&) const = default;
};

/// Joint angle for joint `n` (0 = head joint) of `joint_count`, clamped to
/// +-joint_limit.
double joint_angle(const GaitParams& params, int n, double t, int joint_count,
                   double joint_limit = 1.5707963267948966);

std::vector<double> targets_at(const GaitParams& params, double t, int joint_count,
                               double joint_limit = 1.5707963267948966);

}  // namespace sgl
