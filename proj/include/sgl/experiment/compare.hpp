#pragma once

// Matches PPO evaluation points to the most efficient grid and Bayesian
// optimization points travelling at a similar speed.

#include <optional>
#include <string>
#include <vector>

namespace sgl::experiment {

struct ControllerPoint {
  double velocity = 0.0;
  double power = 0.0;
  std::optional<double> appv;
  std::vector<double> per_joint_power;
};

struct PpoPoint {
  double target_velocity = 0.0;
  ControllerPoint point;
};

struct CompareRow {
  double target_velocity = 0.0;
  double ppo_velocity = 0.0;
  std::optional<double> ppo_appv;
  std::optional<ControllerPoint> grid;   // best-APPV grid point in the window
  std::optional<ControllerPoint> bayes;  // best-APPV BO sample in the window
  std::optional<double> grid_ratio;      // ppo_appv / grid appv
  std::optional<double> bayes_ratio;
  bool comparable() const { return grid_ratio.has_value(); }

  std::string csv_row() const;
};

struct CompareReport {
  double window = 0.01;
  std::vector<CompareRow> rows;

  int comparable_windows() const;
  /// Comparable windows with PPO APPV <= the best grid APPV.
  int ppo_not_worse() const;
  /// 1 - ratio at the row whose target is closest to 0.15 m/s, if comparable.
  std::optional<double> savings_near(double velocity = 0.15) const;

  std::string csv() const;
  std::vector<std::string> summary_lines() const;
};

/// Best-APPV point with velocity in [v - window, v + window], if any.
std::optional<ControllerPoint> best_in_window(const std::vector<ControllerPoint>& points, double v, double window);

CompareReport compare(const std::vector<ControllerPoint>& grid, const std::vector<ControllerPoint>& bayes,
                      const std::vector<PpoPoint>& ppo, double window = 0.01);

}  // namespace sgl::experiment
