#pragma once

#include <stdexcept>
#include <string>

namespace sgl {

/// Rejected input. `field()` names the offending configuration key or argument.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A non-finite value appeared in the integrated state.
class SimulationDiverged : public std::runtime_error {
 public:
  explicit SimulationDiverged(double sim_time, const std::string& detail = {})
      : std::runtime_error("simulation diverged at t=" + std::to_string(sim_time) +
                           (detail.empty() ? "" : " (" + detail + ")")),
        sim_time_(sim_time) {}

  double sim_time() const noexcept { return sim_time_; }

 private:
  double sim_time_;
};

/// A ratio metric (COT, APPV) requested at zero or negative velocity.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sgl
