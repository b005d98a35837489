#pragma once

// Experiment pipelines behind the command-line runner.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgl/experiment/manifest.hpp"
#include "sgl/kv_config.hpp"
#include "sgl/param_search.hpp"
#include "sgl/robot.hpp"
#include "sgl/rl/ppo.hpp"

namespace sgl::experiment {

enum class ExperimentKind { grid, bayes, ppo_train, ppo_eval, compare };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitDiverged = 3;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::grid;
  RobotConfig robot;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir;
  std::string checkpoint;
  bool resume = false;
  /// Pipeline settings ("grid.omega", "train.total_steps", ...).
  KeyValueConfig settings;

  /// Splits "robot.*" keys into `robot`; "seed", "workers" and "checkpoint"
  /// are read if present; everything else must be a setting known to `kind`.
  static ExperimentConfig from_kv(ExperimentKind kind, const KeyValueConfig& kv);
  void validate() const;
  /// Canonical text of everything that determines the artifacts.
  std::string snapshot() const;
};

std::vector<double> parse_list(const std::string& key, const std::string& text);

GridSpec grid_spec_from(const KeyValueConfig& settings);
RunProtocol protocol_from(const KeyValueConfig& settings);
rl::TrainConfig train_config_from(const KeyValueConfig& settings);

struct RunOutcome {
  RunManifest manifest;
  int exit_code = kExitOk;
};

/// Runs one pipeline into cfg.out_dir and writes manifest.json last.
/// Throws ValidationError for configuration and output-directory problems.
RunOutcome run(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace sgl::experiment
