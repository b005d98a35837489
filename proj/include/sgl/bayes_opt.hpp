#pragma once

// Bayesian optimization of gait-equation parameters at a fixed temporal
// frequency: space-filling exploration, then GP-guided expected improvement.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sgl/energy_metrics.hpp"
#include "sgl/gait_equation.hpp"
#include "sgl/gaussian_process.hpp"
#include "sgl/param_search.hpp"

namespace sgl {

/// Expected improvement below `best_so_far` for a minimization problem.
double expected_improvement(double mean, double sigma, double best_so_far);
double expected_improvement(const GpModel& model, const Eigen::VectorXd& query, double best_so_far);

struct BoOptions {
  int n_explore = 10;
  int n_exploit = 100;
  int candidates = 1024;   // random EI candidates per round
  int refine_starts = 4;   // best candidates polished with Nelder-Mead
  std::uint64_t seed = 0;
};

struct BoSample {
  Eigen::VectorXd x;             // unit cube
  std::optional<double> value;   // empty when the objective failed
  double objective = 0.0;        // value, or the penalty assigned to a failure
};

/// Minimizes `objective` over [0,1]^dim. A failed evaluation (nullopt) is
/// charged ten times the worst value seen so far.
std::vector<BoSample> minimize_unit_cube(
    const std::function<std::optional<double>(const Eigen::VectorXd&)>& objective, int dim,
    const BoOptions& options);

/// Bounds of the searched gait parameters; defaults span the standard grid.
struct GaitBounds {
  double y_lo = 0.1, y_hi = 0.4;
  double amplitude_lo = 40.0, amplitude_hi = 180.0;
  double lambda_lo = 40.0, lambda_hi = 120.0;

  GaitParams to_params(double omega, const Eigen::VectorXd& unit) const;
};

struct BoHistoryEntry {
  GaitParams params;
  double objective = 0.0;            // APPV, or the penalty
  std::optional<EvalResult> result;  // empty for diverged runs
  bool penalized = false;
};

struct BoResult {
  double omega = 0.0;
  GaitParams best_params;
  double best_objective = 0.0;
  std::vector<BoHistoryEntry> history;

  static std::string csv_header();
  std::string csv_rows() const;
};

/// Minimizes APPV over (y, amplitude, lambda) at fixed omega. The surrogate
/// models log APPV; runs with no net travel or that diverge are penalized.
BoResult bayes_optimize(double omega, const RobotModel& model, const BoOptions& options = {},
                        const GaitBounds& bounds = {}, const RunProtocol& protocol = {});

}  // namespace sgl
