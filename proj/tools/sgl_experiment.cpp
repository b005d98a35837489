// Command-line runner: sgl-experiment <grid|bayes|ppo-train|ppo-eval|compare> [options]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sgl/errors.hpp"
#include "sgl/experiment/runner.hpp"

using namespace sgl;
using namespace sgl::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Snake gait experiments: grid search, Bayesian optimization, PPO training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool resume = false;

  const char* kinds[] = {"grid", "bayes", "ppo-train", "ppo-eval", "compare"};
  const char* blurbs[] = {"Sweep the gait-equation parameter grid", "Bayesian optimization per omega",
                          "Train a PPO gait policy", "Evaluate a policy at the target velocities",
                          "Compare PPO evaluations with grid and BO results"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], blurbs[i]);
    sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory (SGL_OUT overrides)");
    sub->add_option("--checkpoint", checkpoint, "Policy checkpoint");
    sub->add_flag("--resume", resume, "Continue an existing output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const ExperimentKind kind = parse_kind(app.get_subcommands().front()->get_name());
    const KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
    ExperimentConfig cfg = ExperimentConfig::from_kv(kind, kv);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    cfg.out_dir = out_dir;
    if (const char* env = std::getenv("SGL_OUT"); env && *env) cfg.out_dir = env;
    cfg.resume = resume;

    const RunOutcome outcome = run(cfg, &std::cerr);
    for (const auto& note : outcome.manifest.notes) std::cerr << "note: " << note << "\n";
    std::cout << cfg.out_dir << "/manifest.json\n";
    return outcome.exit_code;
  } catch (const ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SimulationDiverged& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
