#pragma once

// Gait-equation baselines: exhaustive grid search and per-omega evaluation.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgl/energy_metrics.hpp"
#include "sgl/gait_equation.hpp"
#include "sgl/robot.hpp"

namespace sgl {

struct GridSpec {
  std::vector<double> omega_values;      // rad/s
  std::vector<double> y_values;
  std::vector<double> amplitude_values;  // deg
  std::vector<double> lambda_values;     // deg

  /// 12 x 4 x 15 x 9 = 6480 points.
  static GridSpec standard();
  std::size_t size() const {
    return omega_values.size() * y_values.size() * amplitude_values.size() * lambda_values.size();
  }
};

/// Omega outermost, then y, amplitude, lambda.
std::vector<GaitParams> enumerate_grid(const GridSpec& spec);

struct RunProtocol {
  int steps = 1000;
  int warmup = 200;
};

/// Net centre-of-mass displacement below this over the evaluation window counts
/// as standing still.
inline constexpr double kStaticDisplacement = 1e-6;  // m

/// Raised when a gait run diverges; carries the offending parameters.
class GaitEvaluationError : public std::runtime_error {
 public:
  GaitEvaluationError(const GaitParams& params, const std::string& what)
      : std::runtime_error("gait " + params.csv_row() + ": " + what), params_(params) {}
  const GaitParams& params() const { return params_; }

 private:
  GaitParams params_;
};

/// Fresh straight-pose run driven by the gait equation; metrics over the
/// post-warmup window.
EvalResult evaluate_gait(const GaitParams& params, const RobotModel& model,
                         const RunProtocol& protocol = {});

struct GridRecord {
  std::size_t index = 0;
  GaitParams params;
  std::optional<EvalResult> result;  // empty when the run diverged
  std::string error;
};

struct GridOptions {
  int workers = 1;
  RunProtocol protocol;
  /// Already-finished records (e.g. from a resumed run), keyed by index.
  std::vector<GridRecord> completed;
  /// Called once per newly evaluated point, serialized under a lock.
  std::function<void(const GridRecord&)> on_record;
};

/// One record per grid point in enumerate_grid order.
std::vector<GridRecord> grid_search(const GridSpec& spec, const RobotModel& model,
                                    const GridOptions& options = {});

struct VelocityPower {
  double velocity = 0.0;
  double power = 0.0;
};

struct FrontierPoint {
  double velocity_lo = 0.0;  // bin lower edge
  double velocity = 0.0;     // velocity of the point achieving `power`
  double power = 0.0;
};

/// Lowest power needed to travel at least as fast as each bin's lower edge.
/// Bins of width `bin_width` start at zero; empty trailing bins are dropped.
std::vector<FrontierPoint> velocity_frontier(const std::vector<VelocityPower>& points,
                                             double bin_width);

/// Pearson correlation coefficient.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sgl
