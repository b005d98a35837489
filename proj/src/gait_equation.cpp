#include "sgl/gait_equation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgl/errors.hpp"

namespace sgl {
namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

GaitParams GaitParams::make(double omega, double y, double amplitude_deg, double lambda_deg) {
  GaitParams p{omega, y, 1.0 - y, amplitude_deg, lambda_deg};
  p.validate();
  return p;
}

void GaitParams::validate() const {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ValidationError("omega", "must be >= 0");
  if (!(y > 0.0 && y < 1.0)) throw ValidationError("y", "must lie in (0, 1)");
  if (x + y != 1.0) throw ValidationError("x", "must equal 1 - y");
  if (!(amplitude_deg > 0.0 && amplitude_deg <= 180.0)) {
    throw ValidationError("amplitude_deg", "must lie in (0, 180]");
  }
  if (!std::isfinite(lambda_deg)) throw ValidationError("lambda_deg", "must be finite");
}

KeyValueConfig GaitParams::to_kv() const {
  KeyValueConfig kv;
  kv.set("omega", omega);
  kv.set("y", y);
  kv.set("amplitude_deg", amplitude_deg);
  kv.set("lambda_deg", lambda_deg);
  return kv;
}

GaitParams GaitParams::from_kv(const KeyValueConfig& kv) {
  for (const auto& [key, value] : kv.entries()) {
    if (key != "omega" && key != "y" && key != "amplitude_deg" && key != "lambda_deg") {
      throw ValidationError(key, "unknown gait parameter");
    }
  }
  return make(kv.get_double("omega"), kv.get_double("y"), kv.get_double("amplitude_deg"),
              kv.get_double("lambda_deg"));
}

std::string GaitParams::csv_row() const {
  return format_double(omega) + "," + format_double(y) + "," + format_double(amplitude_deg) + "," +
         format_double(lambda_deg);
}

double joint_angle(const GaitParams& params, int n, double t, int joint_count, double joint_limit) {
  const double envelope = static_cast<double>(n) / joint_count * params.x + params.y;
  const double phase = params.omega * t + params.lambda_deg * kDeg * n;
  const double angle = envelope * (params.amplitude_deg * kDeg) * std::sin(phase);
  return std::clamp(angle, -joint_limit, joint_limit);
}

std::vector<double> targets_at(const GaitParams& params, double t, int joint_count,
                               double joint_limit) {
  std::vector<double> out(joint_count);
  for (int n = 0; n < joint_count; ++n) out[n] = joint_angle(params, n, t, joint_count, joint_limit);
  return out;
}

}  // namespace sgl
