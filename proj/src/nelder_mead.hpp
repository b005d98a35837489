#pragma once

// Thin RAII wrapper over GSL's nmsimplex2 minimizer.

#include <functional>

#include <Eigen/Core>

namespace sgl::detail {

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, int max_iterations,
                          double size_tolerance = 1e-6);

}  // namespace sgl::detail
