// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance WORK_DIR [--only 1,4,9] [--workers N]
//
// Long-running artifacts (the full grid and the 3M-step policy) are cached in
// WORK_DIR so reruns skip the expensive parts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "sgl/bayes_opt.hpp"
#include "sgl/energy_metrics.hpp"
#include "sgl/experiment/compare.hpp"
#include "sgl/experiment/csv.hpp"
#include "sgl/experiment/manifest.hpp"
#include "sgl/experiment/runner.hpp"
#include "sgl/parallel.hpp"
#include "sgl/param_search.hpp"
#include "sgl/rl/env.hpp"
#include "sgl/rl/ppo.hpp"
#include "sgl/simulator.hpp"

using namespace sgl;
using namespace sgl::experiment;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "ok " : "FAILED ") + what);
  }
  void note(const std::string& what) { details.push_back(what); }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct Context {
  fs::path dir;
  int workers = 1;
  RobotModel model = build_robot(RobotConfig{});
  std::optional<std::vector<GridRecord>> grid;
  double grid_seconds = 0.0;

  // The full 6480-point grid, shared by several criteria.
  const std::vector<GridRecord>& full_grid() {
    if (grid) return *grid;
    GridOptions opts;
    opts.workers = workers;
    const auto t0 = Clock::now();
    grid = grid_search(GridSpec::standard(), model, opts);
    grid_seconds = seconds_since(t0);
    return *grid;
  }
};

ExperimentConfig experiment(ExperimentKind kind, const KeyValueConfig& kv, const fs::path& out, int workers) {
  ExperimentConfig cfg = ExperimentConfig::from_kv(kind, kv);
  cfg.out_dir = out.string();
  cfg.workers = workers;
  return cfg;
}

std::map<std::string, std::string> checksums(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& a : m.artifacts) out[a.path] = a.sha256;
  return out;
}

Verdict grid_protocol(Context& ctx) {
  Verdict v;
  const auto params = enumerate_grid(GridSpec::standard());
  v.check(params.size() == 6480, "standard grid enumerates " + std::to_string(params.size()) + " parameter sets");

  const auto& records = ctx.full_grid();
  std::size_t evaluated = 0, full_window = 0;
  for (const auto& r : records) {
    if (!r.result) continue;
    ++evaluated;
    if (r.result->window_steps == 800) ++full_window;
  }
  v.check(records.size() == 6480 && evaluated == 6480, std::to_string(evaluated) + " of " +
                                                           std::to_string(records.size()) + " evaluations completed");
  v.check(full_window == 6480, std::to_string(full_window) + " evaluations aggregate exactly 800 post-warmup steps");
  v.check(ctx.grid_seconds < 7200.0, "full grid in " + fmt(ctx.grid_seconds) + " s on " +
                                         std::to_string(ctx.workers) + " worker(s), budget 7200 s");

  const fs::path out = ctx.dir / "grid_subset";
  fs::remove_all(out);
  const KeyValueConfig kv = KeyValueConfig::parse(
      "grid.omega = 0.5, 1.5\ngrid.y = 0.1, 0.3\ngrid.amplitude = 40, 80\ngrid.lambda = 60, 100\n");
  const auto t0 = Clock::now();
  const RunOutcome r = run(experiment(ExperimentKind::grid, kv, out, ctx.workers));
  const double secs = seconds_since(t0);
  const CsvTable t = read_csv((out / "grid.csv").string(), grid_schema());
  v.check(r.exit_code == kExitOk && t.rows.size() == 16, "16-point subset run wrote " +
                                                             std::to_string(t.rows.size()) + " rows");
  v.check(secs < 30.0, "16-point subset in " + fmt(secs) + " s, budget 30 s");
  return v;
}

Verdict metric_identities(Context& ctx) {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> force(-25.0, 25.0), vel(-8.0, 8.0), speed(1e-3, 1.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> length(1, 12);
  const RobotConfig& cfg = ctx.model.config();
  const double gear = cfg.gear, mass = ctx.model.total_mass();
  double worst_joint_sum = 0.0, worst_cot = 0.0, worst_appv = 0.0;
  double phat_lo = 1.0, phat_hi = 0.0;
  const int traces = 100000;
  std::vector<double> f(8), tau(8), w(8);
  for (int n = 0; n < traces; ++n) {
    const int steps = length(rng);
    PowerTrace trace(8, gear);
    double total = 0.0;
    for (int i = 0; i < steps; ++i) {
      for (int j = 0; j < 8; ++j) {
        f[j] = force(rng);
        tau[j] = f[j] * gear;
        w[j] = vel(rng);
        total += std::abs(tau[j] * w[j]);
      }
      trace.append(tau, w, 0.0);
      const double phat = normalized_power(f, w, cfg);
      phat_lo = std::min(phat_lo, phat);
      phat_hi = std::max(phat_hi, phat);
    }
    const double mean_total = total / steps;
    double joint_sum = 0.0;
    for (int j = 0; j < 8; ++j) joint_sum += joint_avg_power(trace, j);
    worst_joint_sum = std::max(worst_joint_sum, rel_err(joint_sum, mean_total));

    const double p = mean_total, speed_v = speed(rng);
    worst_cot = std::max(worst_cot, rel_err(cost_of_transport(p, mass, speed_v) * mass * kGravity * speed_v, p));
    worst_appv = std::max(worst_appv, rel_err(appv(p, speed_v) * speed_v, p));
  }
  v.check(worst_cot <= 1e-12, "COT x m g v = P over 1e5 traces, worst relative error " + fmt(worst_cot));
  v.check(worst_appv <= 1e-12, "APPV x v = P over 1e5 traces, worst relative error " + fmt(worst_appv));
  v.check(worst_joint_sum <= 1e-12,
          "total power equals the joint sum of per-joint averages, worst relative error " + fmt(worst_joint_sum));
  v.check(phat_lo >= 0.0 && phat_hi <= 1.0, "normalized power within [" + fmt(phat_lo) + ", " + fmt(phat_hi) + "]");

  // Hand-evaluated normalized power: one joint at the limits, the rest idle.
  std::vector<double> one_f(8, 0.0), one_w(8, 0.0);
  one_f[2] = cfg.force_limit;
  one_w[2] = cfg.max_joint_speed;
  v.check(normalized_power(one_f, one_w, cfg) == 0.125, "single saturated joint normalizes to 1/8");
  return v;
}

Verdict reward_points(Context&) {
  using namespace sgl::rl;
  Verdict v;
  v.check(combined_reward(0.15, 0.15, 0.0) == 1.0, "v = v_t with zero power gives 1.0");
  v.check(std::abs(velocity_reward(0.1, 0.3)) < 1e-12 && std::abs(velocity_reward(0.3, 0.1)) < 1e-12,
          "velocity error 0.2 gives 0");
  const double expected = 0.03125 * std::pow(0.5, 1.0 / 0.36);
  const double got = combined_reward(0.2, 0.1, 0.5);
  v.check(std::abs(got - expected) < 1e-9, "velocity error 0.1 with half power gives " + fmt(got, 10) +
                                               ", expected " + fmt(expected, 10));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0), vel(-0.5, 0.5), ph(-0.5, 1.5);
  int bad_bounds = 0, bad_power = 0, bad_velocity = 0;
  for (int i = 0; i < 10000; ++i) {
    const double r = combined_reward(vel(rng), vel(rng), ph(rng));
    if (!(r >= 0.0 && r <= 1.0)) ++bad_bounds;
    const double vt = 0.05 + 0.2 * unit(rng), err = 0.19 * unit(rng);
    double p1 = unit(rng), p2 = unit(rng);
    if (p1 > p2) std::swap(p1, p2);
    if (p2 - p1 > 1e-9 && combined_reward(vt, vt + err, p1) <= combined_reward(vt, vt + err, p2)) ++bad_power;
    double e1 = 0.2 * unit(rng), e2 = 0.2 * unit(rng);
    if (e1 > e2) std::swap(e1, e2);
    const double p = 0.9 * unit(rng);
    if (e2 - e1 > 1e-6 && combined_reward(vt, vt - e1, p) <= combined_reward(vt, vt - e2, p)) ++bad_velocity;
  }
  v.check(bad_bounds == 0, "reward in [0, 1] for 1e4 random samples");
  v.check(bad_power == 0, "strictly decreasing in normalized power for 1e4 random samples");
  v.check(bad_velocity == 0, "strictly decreasing in velocity error for 1e4 random samples");
  return v;
}

Verdict physics_sanity(Context& ctx) {
  Verdict v;
  RobotConfig free_cfg;
  free_cfg.lateral_friction_coeff = 0.0;
  free_cfg.forward_damping_coeff = 0.0;
  free_cfg.servo_kp = 0.0;
  free_cfg.servo_kd = 0.0;
  const RobotModel free_model = build_robot(free_cfg);
  Simulator free_sim(free_model);
  SimState s = reset(free_model, std::vector<double>{0.3, -0.4, 0.2, 0.6, -0.5, 0.1, 0.4, -0.2});
  free_sim.apply_impulse(s, 0, Vec2(0.08, -0.15));
  free_sim.apply_impulse(s, 6, Vec2(-0.02, 0.11));
  const Vec2 p0 = linear_momentum(free_model, s);
  const std::vector<double> zero(8, 0.0);
  double drift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    free_sim.step(s, zero);
    drift = std::max(drift, (linear_momentum(free_model, s) - p0).norm());
  }
  v.check(drift < 1e-6, "momentum drift over 1000 free steps " + fmt(drift));

  const double limit = ctx.model.config().max_torque();
  double peak = 0.0;
  bool replay_exact = true;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> target(-ctx.model.config().joint_limit, ctx.model.config().joint_limit);
    std::vector<std::vector<double>> script(1000, std::vector<double>(8));
    for (auto& row : script)
      for (double& t : row) t = target(rng);
    auto play = [&] {
      Simulator sim(ctx.model);
      SimState st = reset(ctx.model);
      for (const auto& row : script) {
        const StepInfo info = sim.step(st, row);
        for (int j = 0; j < 8; ++j) {
          peak = std::max({peak, std::abs(info.torques[j]), std::abs(st.applied_torques[j])});
        }
      }
      return st;
    };
    const SimState a = play();
    const SimState b = play();
    replay_exact = replay_exact && a == b;
  }
  v.check(peak <= limit, "peak servo torque over 8 x 1000 random-target steps " + fmt(peak, 6) + " N m, limit " +
                             fmt(limit) + " N m");
  v.check(replay_exact, "replays of the same script are bit-identical");
  return v;
}

Verdict ppo_numerics(Context&) {
  using namespace oracle;
  Verdict v;
  const PolicyNet net = small_net(5);
  struct GradCase {
    const char* name;
    std::uint64_t seed;
    int n;
    double log_ratio;
    double eps;
    LossWeights w;
  };
  const GradCase cases[] = {{"value loss", 1, 12, 0.0, 0.2, {0.0, 1.0, 0.0}},
                            {"unclipped surrogate", 2, 12, 0.0, 10.0, {1.0, 0.0, 0.0}},
                            {"clipped surrogate inside the range", 3, 12, -0.1, 0.2, {1.0, 0.5, 0.01}},
                            {"clipped surrogate outside the range", 4, 12, -0.5, 0.2, {1.0, 0.5, 0.01}},
                            {"entropy bonus", 5, 4, 0.0, 0.2, {0.0, 0.0, 1.0}}};
  for (const auto& c : cases) {
    const SyntheticBatch b = synthetic_batch(net, c.n, c.seed, c.log_ratio);
    const double err = max_rel_error(analytic_gradient(net, b, c.eps, c.w), numeric_gradient(net, b, c.eps, c.w));
    v.check(err < 1e-4, std::string(c.name) + " gradient relative error " + fmt(err));
  }

  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int len = 1 + trial % 5;
    std::vector<double> r(len), val(len);
    for (int t = 0; t < len; ++t) {
      r[t] = n(rng);
      val[t] = n(rng);
    }
    const double boot = n(rng), gamma = u(rng), lambda = u(rng);
    const GaeResult g = compute_gae(r, val, boot, gamma, lambda);
    const std::vector<double> want = gae_oracle(r, val, boot, gamma, lambda);
    for (int t = 0; t < len; ++t) worst = std::max(worst, std::abs(g.advantages[t] - want[t]));
  }
  v.check(worst < 1e-12, "GAE matches the n-step mixture oracle on 500 episodes of length 1-5, max error " +
                             fmt(worst));

  const PolicyNet clip_net = small_net(8);
  const LossWeights surrogate_only{1.0, 0.0, 0.0};
  SyntheticBatch above = synthetic_batch(clip_net, 10, 9, -0.5);
  above.advantages.setConstant(1.0);
  SyntheticBatch below = synthetic_batch(clip_net, 10, 9, 0.5);
  below.advantages.setConstant(-1.0);
  double leak = 0.0;
  for (double g : analytic_gradient(clip_net, above, 0.2, surrogate_only)) leak = std::max(leak, std::abs(g));
  for (double g : analytic_gradient(clip_net, below, 0.2, surrogate_only)) leak = std::max(leak, std::abs(g));
  v.check(leak == 0.0, "clip region gradient is exactly zero (max |g| " + fmt(leak) + ")");
  return v;
}

Verdict desk_learning(Context& ctx) {
  Verdict v;
  rl::TrainConfig tc;
  tc.total_steps = 200000;
  tc.fixed_velocity = 0.1;
  const auto t0 = Clock::now();
  const rl::TrainResult r = rl::train(ctx.model.config(), tc, 1);
  const double secs = seconds_since(t0);
  const auto& eps = r.episodes;
  if (eps.size() < 20) {
    v.check(false, "only " + std::to_string(eps.size()) + " episodes logged");
    return v;
  }
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 10; ++i) {
    first += eps[i].episode_return / 10.0;
    last += eps[eps.size() - 10 + i].episode_return / 10.0;
  }
  v.note(std::to_string(eps.size()) + " episodes in " + fmt(secs) + " s");
  v.check(last >= 3.0 * first, "final-10 mean return " + fmt(last) + " vs first-10 " + fmt(first) + " (ratio " +
                                   fmt(last / first) + ", need >= 3)");
  const EvalResult e = rl::evaluate_policy_at(r.net, ctx.model, 0.1);
  v.check(std::abs(e.mean_velocity - 0.1) <= 0.05,
          "evaluated velocity " + fmt(e.mean_velocity) + " m/s for target 0.1 m/s");
  return v;
}

Verdict bo_validity(Context& ctx) {
  Verdict v;
  int hits = 0;
  std::string bests;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BoOptions opts;
    opts.seed = seed;
    const auto samples = minimize_unit_cube(
        [](const Eigen::VectorXd& x) { return std::optional(oracle::branin(x)); }, 2, opts);
    double best = INFINITY;
    for (const auto& s : samples) best = std::min(best, s.objective);
    if (std::abs(best - 0.397887) <= 0.5) ++hits;
    bests += (seed > 1 ? " " : "") + fmt(best);
    if (samples.size() != 110) v.check(false, "Branin budget was " + std::to_string(samples.size()));
  }
  v.check(hits >= 8, "Branin best within 0.5 of 0.3979 in " + std::to_string(hits) + "/10 seeds (" + bests + ")");

  const auto& grid = ctx.full_grid();
  const std::vector<double> omegas{0.5, 1.0, 1.5, 2.5};
  std::vector<double> ratios(omegas.size());
  parallel_for(omegas.size(), ctx.workers, [&](std::size_t i) {
    BoOptions opts;
    opts.seed = i + 1;
    const BoResult r = bayes_optimize(omegas[i], ctx.model, opts);
    double grid_best = INFINITY;
    for (const auto& g : grid)
      if (g.params.omega == omegas[i] && g.result && g.result->appv) grid_best = std::min(grid_best, *g.result->appv);
    ratios[i] = r.best_objective / grid_best;
  });
  int matched = 0;
  std::string detail;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (ratios[i] <= 1.05) ++matched;
    detail += (i ? ", " : "") + std::string("omega ") + fmt(omegas[i]) + ": " + fmt(ratios[i]);
  }
  v.check(matched >= 3, "BO/grid best APPV ratio <= 1.05 on " + std::to_string(matched) + "/" +
                            std::to_string(omegas.size()) + " omegas (" + detail + ")");
  return v;
}

struct PpoArtifacts {
  fs::path policy;
  std::vector<RunOutcome> evals;
  std::vector<fs::path> eval_dirs;
};

// Trains (or reuses) the full 3M-step policy, then evaluates it twice.
PpoArtifacts ppo_artifacts(Context& ctx) {
  static std::optional<PpoArtifacts> cache;
  if (cache) return *cache;
  PpoArtifacts a;
  const fs::path train_dir = ctx.dir / "ppo_train";
  ExperimentConfig train = experiment(ExperimentKind::ppo_train, {}, train_dir, ctx.workers);
  train.seed = 1;
  train.resume = fs::exists(train_dir);
  const RunOutcome t = run(train, &std::cerr);
  if (t.exit_code != kExitOk) throw std::runtime_error("ppo-train exited with " + std::to_string(t.exit_code));
  a.policy = train_dir / "policy.sgl";
  for (int i = 0; i < 2; ++i) {
    const fs::path out = ctx.dir / ("ppo_eval_" + std::to_string(i));
    fs::remove_all(out);
    ExperimentConfig eval = experiment(ExperimentKind::ppo_eval, {}, out, i == 0 ? 1 : ctx.workers + 1);
    eval.checkpoint = a.policy.string();
    a.evals.push_back(run(eval));
    a.eval_dirs.push_back(out);
  }
  cache = a;
  return a;
}

Verdict trend_reproduction(Context& ctx) {
  Verdict v;
  const auto& grid = ctx.full_grid();
  std::vector<VelocityPower> cloud;
  std::vector<ControllerPoint> grid_points;
  for (const auto& g : grid) {
    if (!g.result || !g.result->appv) continue;
    cloud.push_back({g.result->mean_velocity, g.result->mean_power});
    grid_points.push_back({g.result->mean_velocity, g.result->mean_power, g.result->appv, {}});
  }
  const auto frontier = velocity_frontier(cloud, 0.01);
  std::vector<double> fv, fp;
  for (const auto& f : frontier) {
    fv.push_back(f.velocity);
    fp.push_back(f.power);
  }
  const double grid_r = pearson(fv, fp);
  v.check(grid_r > 0.9, "grid frontier velocity-power correlation " + fmt(grid_r) + " over " +
                            std::to_string(frontier.size()) + " bins");

  const PpoArtifacts a = ppo_artifacts(ctx);
  const CsvTable t = read_csv((a.eval_dirs[0] / "ppo_eval.csv").string(), ppo_eval_schema());
  const std::size_t tv = t.column("target_velocity"), st = t.column("status"), vel = t.column("velocity"),
                    pow = t.column("power"), ap = t.column("appv");
  std::vector<double> pv, pp;
  std::vector<PpoPoint> ppo;
  for (const auto& row : t.rows) {
    if (row[st] != "ok") continue;
    const double velocity = parse_number(row[vel]), power = parse_number(row[pow]), a_v = parse_number(row[ap]);
    pv.push_back(velocity);
    pp.push_back(power);
    ppo.push_back({parse_number(row[tv]),
                   {velocity, power, std::isnan(a_v) ? std::nullopt : std::optional<double>(a_v), {}}});
  }
  const double ppo_r = pv.size() >= 2 ? pearson(pv, pp) : NAN;
  v.check(ppo_r > 0.9, "PPO evaluation velocity-power correlation " + fmt(ppo_r) + " over " +
                           std::to_string(pv.size()) + " points");

  const CompareReport report = compare(grid_points, {}, ppo);
  const int windows = report.comparable_windows(), wins = report.ppo_not_worse();
  double ratio_lo = INFINITY, ratio_hi = 0.0;
  for (const auto& row : report.rows) {
    if (!row.grid_ratio) continue;
    ratio_lo = std::min(ratio_lo, *row.grid_ratio);
    ratio_hi = std::max(ratio_hi, *row.grid_ratio);
  }
  v.check(windows > 0 && 2 * wins >= windows,
          "3M-step policy APPV <= best grid APPV in " + std::to_string(wins) + "/" + std::to_string(windows) +
              " comparable windows (PPO/grid APPV ratio " + fmt(ratio_lo) + " to " + fmt(ratio_hi) + ")");
  const auto savings = report.savings_near(0.15);
  v.note("reference only: savings near 0.15 m/s " +
         (savings ? fmt(100.0 * *savings, 3) + "%" : std::string("n/a")) + ", reference target 35%-65%");
  return v;
}

Verdict evaluation_protocol(Context& ctx) {
  Verdict v;
  const PpoArtifacts a = ppo_artifacts(ctx);
  const auto targets = rl::evaluation_targets();
  v.check(targets.size() == 45 && std::abs(targets.front() - 0.03) < 1e-12 && std::abs(targets.back() - 0.25) < 1e-12,
          std::to_string(targets.size()) + " targets from " + fmt(targets.front()) + " to " + fmt(targets.back()) +
              " m/s in 0.005 steps");
  const CsvTable t = read_csv((a.eval_dirs[0] / "ppo_eval.csv").string(), ppo_eval_schema());
  bool aligned = t.rows.size() == targets.size();
  for (std::size_t i = 0; aligned && i < t.rows.size(); ++i) {
    aligned = std::abs(parse_number(t.rows[i][0]) - targets[i]) < 1e-12;
  }
  v.check(aligned, "ppo-eval wrote " + std::to_string(t.rows.size()) + " rows, one per target in order");
  v.check(a.evals[0].exit_code == kExitOk && a.evals[1].exit_code == kExitOk, "both evaluation runs succeeded");
  v.check(checksums(a.evals[0].manifest) == checksums(a.evals[1].manifest),
          "replays with different worker counts produce identical artifact checksums");
  return v;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict(Context&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string dir;
  std::vector<int> only;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("work_dir", dir, "Scratch and cache directory")->required();
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.dir = dir;
  ctx.workers = workers;
  fs::create_directories(ctx.dir);

  const std::vector<Criterion> criteria{
      {1, "grid protocol fidelity", grid_protocol},   {2, "metric identities", metric_identities},
      {3, "reward point tests", reward_points},        {4, "physics sanity", physics_sanity},
      {5, "PPO numerics", ppo_numerics},               {6, "desk-scale learning", desk_learning},
      {7, "BO validity", bo_validity},                 {8, "trend reproduction", trend_reproduction},
      {9, "evaluation protocol", evaluation_protocol}};

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  std::vector<std::string> summary;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.fn(ctx);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& d : v.details) std::cerr << "  [" << c.id << "] " << d << "\n";
    const std::string line = std::string(v.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + " (" +
                             c.name + ") " + fmt(seconds_since(t0), 3) + " s";
    std::cout << line << std::endl;
    summary.push_back(line);
    if (!v.pass) ++failed;
  }
  std::cout << "acceptance: " << summary.size() - failed << "/" << summary.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
