#include "sgl/experiment/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "sgl/bayes_opt.hpp"
#include "sgl/errors.hpp"
#include "sgl/experiment/charts.hpp"
#include "sgl/experiment/compare.hpp"
#include "sgl/experiment/csv.hpp"
#include "sgl/parallel.hpp"

namespace sgl::experiment {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kProtocolKeys{"protocol.steps", "protocol.warmup"};

const std::set<std::string>& settings_for(ExperimentKind kind) {
  static const std::set<std::string> grid{"grid.omega", "grid.y", "grid.amplitude", "grid.lambda"};
  static const std::set<std::string> bayes{"bayes.omegas", "bayes.explore", "bayes.exploit", "bayes.candidates",
                                           "bayes.refine_starts"};
  static const std::set<std::string> train{
      "train.total_steps",  "train.steps_per_update", "train.epochs_per_update", "train.minibatch_size",
      "train.clip_epsilon", "train.gamma",            "train.gae_lambda",        "train.learning_rate",
      "train.max_grad_norm", "train.value_coef",      "train.entropy_coef",      "train.init_log_std",
      "train.episode_length", "train.warmup_episodes", "train.warmup_velocity",  "train.velocity_cycle",
      "train.fixed_velocity", "train.checkpoint_every", "train.velocity_window", "train.reward_velocity"};
  static const std::set<std::string> eval{"eval.targets", "eval.profile_velocity"};
  static const std::set<std::string> cmp{"compare.grid_csv", "compare.bayes_csv", "compare.ppo_csv", "compare.window",
                                         "compare.profile_velocity"};
  switch (kind) {
    case ExperimentKind::grid: return grid;
    case ExperimentKind::bayes: return bayes;
    case ExperimentKind::ppo_train: return train;
    case ExperimentKind::ppo_eval: return eval;
    case ExperimentKind::compare: return cmp;
  }
  return grid;
}

double setting(const KeyValueConfig& s, const std::string& key, double fallback) {
  return s.contains(key) ? s.get_double(key) : fallback;
}

int setting(const KeyValueConfig& s, const std::string& key, int fallback) {
  return s.contains(key) ? s.get_int(key) : fallback;
}

std::vector<std::string> split_paths(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void say(std::ostream* log, const std::string& line) {
  if (log) *log << line << std::endl;
}

std::string eval_fields(const std::optional<EvalResult>& r) {
  if (r) return r->csv_row();
  std::string s = "nan,nan,nan,nan";
  for (int j = 0; j < 8; ++j) s += ",nan";
  return s;
}

std::optional<EvalResult> eval_from(const std::vector<std::string>& fields, std::size_t first) {
  if (fields[first] == "nan") return std::nullopt;
  return EvalResult::from_csv_fields(std::span<const std::string>(fields).subspan(first));
}

std::string grid_row(const GridRecord& r) {
  return std::to_string(r.index) + "," + r.params.csv_row() + "," + (r.result ? "ok" : "diverged") + "," +
         eval_fields(r.result);
}

GridRecord grid_record_from(const std::vector<std::string>& f) {
  GridRecord r;
  r.index = static_cast<std::size_t>(std::stoull(f[0]));
  r.params = GaitParams::make(parse_number(f[1]), parse_number(f[2]), parse_number(f[3]), parse_number(f[4]));
  if (f[5] == "ok") {
    r.result = eval_from(f, 6);
  } else if (f[5] == "diverged") {
    r.error = "diverged";
  } else {
    throw ValidationError("status", "unknown grid status '" + f[5] + "'");
  }
  return r;
}

ControllerPoint point_from(const EvalResult& r) { return {r.mean_velocity, r.mean_power, r.appv, r.per_joint_power}; }

std::string omega_file(double omega) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "bayes/omega_%.4g.csv", omega);
  return buf;
}

std::string bayes_rows(const BoResult& r) {
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    const auto& e = r.history[i];
    rows.push_back(std::to_string(i) + "," + e.params.csv_row() + "," + format_double(e.objective) + "," +
                   (e.penalized ? "1" : "0") + "," + eval_fields(e.result));
  }
  return csv_document(bayes_schema(), rows);
}

std::vector<ControllerPoint> bayes_points(const CsvTable& t) {
  std::vector<ControllerPoint> out;
  const int pen = t.column("penalized");
  for (const auto& f : t.rows) {
    if (f[pen] != "0") continue;
    if (auto r = eval_from(f, static_cast<std::size_t>(pen) + 1); r && r->appv) out.push_back(point_from(*r));
  }
  return out;
}

std::vector<VelocityPower> to_vp(const std::vector<ControllerPoint>& pts) {
  std::vector<VelocityPower> out;
  for (const auto& p : pts) out.push_back({p.velocity, p.power});
  return out;
}

struct PipelineResult {
  int exit_code = kExitOk;
  std::vector<std::string> notes;
};

PipelineResult run_grid(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream* log) {
  const GridSpec spec = grid_spec_from(cfg.settings);
  const RobotModel model = build_robot(cfg.robot);
  GridOptions opts;
  opts.workers = cfg.workers;
  opts.protocol = protocol_from(cfg.settings);

  const fs::path partial = w.path("grid_partial.csv");
  const fs::path previous = fs::exists(partial) ? partial : w.path("grid.csv");
  if (cfg.resume && fs::exists(previous)) {
    std::ifstream in(previous);
    std::string text(std::istreambuf_iterator<char>(in), {});
    text.erase(text.find_last_of('\n') + 1);  // drop a torn final line
    for (const auto& f : parse_csv(text, grid_schema()).rows) opts.completed.push_back(grid_record_from(f));
    say(log, "resuming grid with " + std::to_string(opts.completed.size()) + " finished points");
    std::ofstream(partial, std::ios::trunc) << text;
  } else {
    std::ofstream(partial, std::ios::trunc) << csv_document(grid_schema(), {});
  }
  std::ofstream stream(partial, std::ios::app);
  const std::size_t total = spec.size();
  std::size_t done = opts.completed.size();
  opts.on_record = [&](const GridRecord& r) {
    stream << grid_row(r) << '\n' << std::flush;
    if (++done % 100 == 0 || done == total) say(log, "grid " + std::to_string(done) + "/" + std::to_string(total));
  };
  const std::vector<GridRecord> records = grid_search(spec, model, opts);
  stream.close();

  std::vector<std::string> rows;
  std::vector<VelocityPower> pts;
  int diverged = 0;
  for (const auto& r : records) {
    rows.push_back(grid_row(r));
    if (r.result) pts.push_back({r.result->mean_velocity, r.result->mean_power});
    else ++diverged;
  }
  w.write("grid.csv", csv_document(grid_schema(), rows));
  if (!pts.empty()) {
    const ChartOutput chart = emit_scatter({{"grid", pts}});
    w.write("grid_scatter.csv", chart.csv);
    w.write("grid_scatter.svg", chart.svg);
  }
  fs::remove(partial);
  PipelineResult out;
  out.notes.push_back(std::to_string(records.size()) + " grid evaluations, " + std::to_string(diverged) + " diverged");
  if (diverged > 0) out.exit_code = kExitDiverged;
  return out;
}

PipelineResult run_bayes(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream* log) {
  std::vector<double> omegas = cfg.settings.contains("bayes.omegas")
                                   ? parse_list("bayes.omegas", cfg.settings.raw("bayes.omegas"))
                                   : GridSpec::standard().omega_values;
  const RobotModel model = build_robot(cfg.robot);
  const RunProtocol protocol = protocol_from(cfg.settings);
  BoOptions base;
  base.n_explore = setting(cfg.settings, "bayes.explore", base.n_explore);
  base.n_exploit = setting(cfg.settings, "bayes.exploit", base.n_exploit);
  base.candidates = setting(cfg.settings, "bayes.candidates", base.candidates);
  base.refine_starts = setting(cfg.settings, "bayes.refine_starts", base.refine_starts);

  std::vector<std::string> docs(omegas.size());
  std::vector<char> fresh(omegas.size(), 0);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const fs::path p = w.path(omega_file(omegas[i]));
    if (cfg.resume && fs::exists(p)) {
      std::ifstream in(p);
      docs[i].assign(std::istreambuf_iterator<char>(in), {});
      parse_csv(docs[i], bayes_schema());
      say(log, "reusing " + omega_file(omegas[i]));
    }
  }
  std::mutex sink;
  parallel_for(omegas.size(), cfg.workers, [&](std::size_t i) {
    if (!docs[i].empty()) return;
    BoOptions o = base;
    o.seed = cfg.seed * 1000 + i;
    const BoResult r = bayes_optimize(omegas[i], model, o, GaitBounds{}, protocol);
    std::lock_guard lock(sink);
    docs[i] = bayes_rows(r);
    fresh[i] = 1;
    w.write(omega_file(omegas[i]), docs[i]);
    say(log, "bayes omega=" + format_double(omegas[i]) + " best APPV " + format_double(r.best_objective));
  });

  std::vector<ControllerPoint> all;
  PipelineResult out;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!fresh[i]) w.add_existing(omega_file(omegas[i]));
    const auto pts = bayes_points(parse_csv(docs[i], bayes_schema()));
    all.insert(all.end(), pts.begin(), pts.end());
  }
  if (!all.empty()) {
    const ChartOutput chart = emit_scatter({{"bayes", to_vp(all)}});
    w.write("bayes_scatter.csv", chart.csv);
    w.write("bayes_scatter.svg", chart.svg);
  }
  out.notes.push_back(std::to_string(omegas.size()) + " BO trials");
  return out;
}

PipelineResult run_ppo_train(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream* log) {
  rl::TrainConfig tc = train_config_from(cfg.settings);
  PipelineResult out;
  if (cfg.resume && fs::exists(w.path("policy.sgl")) && fs::exists(w.path("train_log.csv"))) {
    read_csv(w.path("train_log.csv").string(), train_log_schema());
    rl::load_checkpoint(w.path("policy.sgl").string());
    out.notes.push_back("resumed: training already complete");
  } else {
    tc.checkpoint_dir = w.path("checkpoints").string();
    rl::TrainCallbacks cb;
    cb.on_episode = [&](const rl::EpisodeLog& e) {
      if (e.episode % 10 == 0) {
        say(log, "episode " + std::to_string(e.episode) + " v_t=" + format_double(e.target_velocity) +
                     " return=" + format_double(std::round(e.episode_return * 100) / 100));
      }
    };
    const rl::TrainResult r = rl::train(cfg.robot, tc, cfg.seed, cb);
    std::vector<std::string> rows;
    for (const auto& e : r.episodes) rows.push_back(e.csv_row());
    w.write("train_log.csv", csv_document(train_log_schema(), rows));
    const fs::path tmp = w.path("policy.sgl.tmp");
    rl::save_checkpoint(r.net, tmp.string());
    fs::rename(tmp, w.path("policy.sgl"));
    out.notes.insert(out.notes.end(), r.warnings.begin(), r.warnings.end());
    out.notes.push_back(std::to_string(r.steps) + " environment steps, " + std::to_string(r.episodes.size()) +
                        " episodes");
  }
  w.add_existing("policy.sgl");
  if (fs::exists(w.path("checkpoints"))) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(w.path("checkpoints"))) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) w.add_existing("checkpoints/" + n);
  }
  if (cfg.resume) w.add_existing("train_log.csv");
  return out;
}

std::string ppo_eval_row(double target, const std::optional<EvalResult>& r) {
  return format_double(target) + "," + (r ? "ok" : "diverged") + "," + eval_fields(r);
}

PipelineResult run_ppo_eval(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream* log) {
  if (cfg.checkpoint.empty()) throw ValidationError("checkpoint", "ppo-eval needs --checkpoint");
  const rl::PolicyNet net = rl::load_checkpoint(cfg.checkpoint);
  const RobotModel model = build_robot(cfg.robot);
  const RunProtocol protocol = protocol_from(cfg.settings);
  const std::vector<double> targets = cfg.settings.contains("eval.targets")
                                          ? parse_list("eval.targets", cfg.settings.raw("eval.targets"))
                                          : rl::evaluation_targets();
  std::vector<std::optional<EvalResult>> results(targets.size());
  parallel_for(targets.size(), cfg.workers, [&](std::size_t i) {
    try {
      results[i] = rl::evaluate_policy_at(net, model, targets[i], protocol);
    } catch (const SimulationDiverged&) {
    }
  });
  std::vector<std::string> rows;
  std::vector<VelocityPower> pts;
  int diverged = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    rows.push_back(ppo_eval_row(targets[i], results[i]));
    if (results[i]) pts.push_back({results[i]->mean_velocity, results[i]->mean_power});
    else ++diverged;
  }
  w.write("ppo_eval.csv", csv_document(ppo_eval_schema(), rows));
  say(log, "evaluated " + std::to_string(targets.size()) + " target velocities");
  if (!pts.empty()) {
    const ChartOutput chart = emit_scatter({{"ppo", pts}});
    w.write("ppo_scatter.csv", chart.csv);
    w.write("ppo_scatter.svg", chart.svg);
  }
  const double pv = setting(cfg.settings, "eval.profile_velocity", 0.25);
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (std::abs(targets[i] - pv) < std::abs(targets[nearest] - pv)) nearest = i;
  if (!targets.empty() && results[nearest]) {
    const ChartOutput prof =
        emit_power_profile({{"ppo", results[nearest]->per_joint_power}}, format_double(targets[nearest]) + " m/s");
    w.write("ppo_power_profile.csv", prof.csv);
    w.write("ppo_power_profile.svg", prof.svg);
  }
  PipelineResult out;
  out.notes.push_back("checkpoint " + cfg.checkpoint + " sha256 " + sha256_file(cfg.checkpoint));
  if (!cfg.settings.contains("eval.targets")) {
    out.notes.push_back(
        "45 targets 0.030..0.250 step 0.005: [0.025, 0.25] at 0.005 has 46 points, the lower endpoint is excluded");
  }
  if (diverged > 0) {
    out.notes.push_back(std::to_string(diverged) + " evaluations diverged");
    out.exit_code = kExitDiverged;
  }
  return out;
}

PipelineResult run_compare(const ExperimentConfig& cfg, ArtifactWriter& w, std::ostream* log) {
  for (const char* key : {"compare.grid_csv", "compare.ppo_csv"}) {
    if (!cfg.settings.contains(key)) throw ValidationError(key, "required for compare");
  }
  std::vector<ControllerPoint> grid;
  for (const auto& f : read_csv(cfg.settings.raw("compare.grid_csv"), grid_schema()).rows) {
    const GridRecord r = grid_record_from(f);
    if (r.result && r.result->appv) grid.push_back(point_from(*r.result));
  }
  std::vector<ControllerPoint> bayes;
  if (cfg.settings.contains("compare.bayes_csv")) {
    for (const auto& p : split_paths(cfg.settings.raw("compare.bayes_csv"))) {
      const auto pts = bayes_points(read_csv(p, bayes_schema()));
      bayes.insert(bayes.end(), pts.begin(), pts.end());
    }
  }
  std::vector<PpoPoint> ppo;
  for (const auto& f : read_csv(cfg.settings.raw("compare.ppo_csv"), ppo_eval_schema()).rows) {
    if (f[1] != "ok") continue;
    ppo.push_back({parse_number(f[0]), point_from(*eval_from(f, 2))});
  }
  const double window = setting(cfg.settings, "compare.window", 0.01);
  const CompareReport report = compare(grid, bayes, ppo, window);
  w.write("compare.csv", report.csv());
  std::string summary;
  for (const auto& line : report.summary_lines()) summary += line + "\n";
  w.write("compare_summary.txt", summary);
  say(log, report.summary_lines().end()[-2]);
  say(log, report.summary_lines().back());

  std::vector<ScatterSeries> series;
  if (!grid.empty()) series.push_back({"grid", to_vp(grid)});
  if (!bayes.empty()) series.push_back({"bayes", to_vp(bayes)});
  std::vector<ControllerPoint> ppo_pts;
  for (const auto& p : ppo) ppo_pts.push_back(p.point);
  if (!ppo_pts.empty()) series.push_back({"ppo", to_vp(ppo_pts)});
  if (!series.empty()) {
    const ChartOutput chart = emit_scatter(series);
    w.write("scatter.csv", chart.csv);
    w.write("scatter.svg", chart.svg);
  }

  const double pv = setting(cfg.settings, "compare.profile_velocity", 0.25);
  std::vector<ProfileSeries> profile;
  if (auto g = best_in_window(grid, pv, window); g && g->per_joint_power.size() == 8) {
    profile.push_back({"grid", g->per_joint_power});
  }
  if (auto b = best_in_window(bayes, pv, window); b && b->per_joint_power.size() == 8) {
    profile.push_back({"bayes", b->per_joint_power});
  }
  const PpoPoint* nearest = nullptr;
  for (const auto& p : ppo)
    if (!nearest || std::abs(p.target_velocity - pv) < std::abs(nearest->target_velocity - pv)) nearest = &p;
  if (nearest && nearest->point.per_joint_power.size() == 8) profile.push_back({"ppo", nearest->point.per_joint_power});
  PipelineResult out;
  if (!profile.empty()) {
    const ChartOutput prof = emit_power_profile(profile, format_double(pv) + " m/s");
    w.write("power_profile.csv", prof.csv);
    w.write("power_profile.svg", prof.svg);
  } else {
    out.notes.push_back("no controller has a point near " + format_double(pv) + " m/s; power profile skipped");
  }
  for (const char* key : {"compare.grid_csv", "compare.bayes_csv", "compare.ppo_csv"}) {
    if (!cfg.settings.contains(key)) continue;
    for (const auto& p : split_paths(cfg.settings.raw(key))) out.notes.push_back("input " + p + " sha256 " + sha256_file(p));
  }
  out.notes.push_back("paper reference: PPO saves 35%-65% vs. the gait equation near 0.15 m/s (not a gate)");
  return out;
}

bool is_empty_dir(const fs::path& p) { return fs::is_directory(p) && fs::directory_iterator(p) == fs::directory_iterator(); }

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::grid: return "grid";
    case ExperimentKind::bayes: return "bayes";
    case ExperimentKind::ppo_train: return "ppo-train";
    case ExperimentKind::ppo_eval: return "ppo-eval";
    case ExperimentKind::compare: return "compare";
  }
  return "grid";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::grid, ExperimentKind::bayes, ExperimentKind::ppo_train, ExperimentKind::ppo_eval,
                 ExperimentKind::compare}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("kind", "unknown experiment kind '" + name + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_paths(text)) {
    try {
      out.push_back(parse_number(item));
    } catch (const ValidationError&) {
      throw ValidationError(key, "bad number '" + item + "'");
    }
    if (!std::isfinite(out.back())) throw ValidationError(key, "values must be finite");
  }
  if (out.empty()) throw ValidationError(key, "empty list");
  return out;
}

ExperimentConfig ExperimentConfig::from_kv(ExperimentKind kind, const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  KeyValueConfig robot;
  const std::set<std::string>& known = settings_for(kind);
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("robot.", 0) == 0) {
      robot.set(key.substr(6), value);
    } else if (key == "seed") {
      const int s = kv.get_int("seed");
      if (s < 0) throw ValidationError("seed", "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "workers") {
      cfg.workers = kv.get_int("workers");
    } else if (key == "checkpoint") {
      cfg.checkpoint = value;
    } else if (known.count(key) || kProtocolKeys.count(key)) {
      cfg.settings.set(key, value);
    } else {
      throw ValidationError(key, "not a setting of the " + to_string(kind) + " experiment");
    }
  }
  cfg.robot = RobotConfig::from_kv(robot);
  return cfg;
}

void ExperimentConfig::validate() const {
  robot.validate();
  if (workers < 1) throw ValidationError("workers", "must be at least 1");
  if (out_dir.empty()) throw ValidationError("out", "output directory required (--out or SGL_OUT)");
  const std::set<std::string>& known = settings_for(kind);
  for (const auto& [key, value] : settings.entries()) {
    if (!known.count(key) && !kProtocolKeys.count(key)) {
      throw ValidationError(key, "not a setting of the " + to_string(kind) + " experiment");
    }
  }
  protocol_from(settings);
  switch (kind) {
    case ExperimentKind::grid: grid_spec_from(settings); break;
    case ExperimentKind::bayes:
      if (settings.contains("bayes.omegas")) parse_list("bayes.omegas", settings.raw("bayes.omegas"));
      break;
    case ExperimentKind::ppo_train: train_config_from(settings).validate(); break;
    case ExperimentKind::ppo_eval:
      if (checkpoint.empty()) throw ValidationError("checkpoint", "ppo-eval needs --checkpoint");
      if (settings.contains("eval.targets")) parse_list("eval.targets", settings.raw("eval.targets"));
      break;
    case ExperimentKind::compare:
      for (const char* key : {"compare.grid_csv", "compare.ppo_csv"}) {
        if (!settings.contains(key)) throw ValidationError(key, "required for compare");
      }
      break;
  }
}

std::string ExperimentConfig::snapshot() const {
  KeyValueConfig kv;
  kv.set("kind", to_string(kind));
  kv.set("seed", std::to_string(seed));
  if (!checkpoint.empty()) kv.set("checkpoint", checkpoint);
  const KeyValueConfig robot_kv = robot.to_kv();
  for (const auto& [key, value] : robot_kv.entries()) kv.set("robot." + key, value);
  for (const auto& [key, value] : settings.entries()) kv.set(key, value);
  return kv.to_string();
}

GridSpec grid_spec_from(const KeyValueConfig& s) {
  GridSpec spec = GridSpec::standard();
  if (s.contains("grid.omega")) spec.omega_values = parse_list("grid.omega", s.raw("grid.omega"));
  if (s.contains("grid.y")) spec.y_values = parse_list("grid.y", s.raw("grid.y"));
  if (s.contains("grid.amplitude")) spec.amplitude_values = parse_list("grid.amplitude", s.raw("grid.amplitude"));
  if (s.contains("grid.lambda")) spec.lambda_values = parse_list("grid.lambda", s.raw("grid.lambda"));
  for (const auto& p : enumerate_grid(spec)) p.validate();
  return spec;
}

RunProtocol protocol_from(const KeyValueConfig& s) {
  RunProtocol p;
  p.steps = setting(s, "protocol.steps", p.steps);
  p.warmup = setting(s, "protocol.warmup", p.warmup);
  if (p.warmup < 0 || p.steps <= p.warmup) throw ValidationError("protocol.steps", "must exceed protocol.warmup");
  return p;
}

rl::TrainConfig train_config_from(const KeyValueConfig& s) {
  rl::TrainConfig c;
  if (s.contains("train.total_steps")) {
    const double v = s.get_double("train.total_steps");
    if (!(v >= 1.0 && v == std::floor(v))) throw ValidationError("train.total_steps", "must be a positive integer");
    c.total_steps = static_cast<long>(v);
  }
  c.steps_per_update = setting(s, "train.steps_per_update", c.steps_per_update);
  c.epochs_per_update = setting(s, "train.epochs_per_update", c.epochs_per_update);
  c.minibatch_size = setting(s, "train.minibatch_size", c.minibatch_size);
  c.clip_epsilon = setting(s, "train.clip_epsilon", c.clip_epsilon);
  c.gamma = setting(s, "train.gamma", c.gamma);
  c.gae_lambda = setting(s, "train.gae_lambda", c.gae_lambda);
  c.learning_rate = setting(s, "train.learning_rate", c.learning_rate);
  c.max_grad_norm = setting(s, "train.max_grad_norm", c.max_grad_norm);
  c.value_coef = setting(s, "train.value_coef", c.value_coef);
  c.entropy_coef = setting(s, "train.entropy_coef", c.entropy_coef);
  c.init_log_std = setting(s, "train.init_log_std", c.init_log_std);
  c.episode_length = setting(s, "train.episode_length", c.episode_length);
  c.warmup_episodes = setting(s, "train.warmup_episodes", c.warmup_episodes);
  c.warmup_velocity = setting(s, "train.warmup_velocity", c.warmup_velocity);
  if (s.contains("train.velocity_cycle")) c.velocity_cycle = parse_list("train.velocity_cycle", s.raw("train.velocity_cycle"));
  if (s.contains("train.fixed_velocity")) c.fixed_velocity = s.get_double("train.fixed_velocity");
  c.checkpoint_every = setting(s, "train.checkpoint_every", c.checkpoint_every);
  c.velocity_window = setting(s, "train.velocity_window", c.velocity_window);
  if (s.contains("train.reward_velocity")) {
    const std::string& v = s.raw("train.reward_velocity");
    if (v == "head") c.reward_velocity = rl::RewardVelocity::head;
    else if (v == "com") c.reward_velocity = rl::RewardVelocity::com;
    else throw ValidationError("train.reward_velocity", "expected head or com");
  }
  c.validate();
  return c;
}

RunOutcome run(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  const std::string snapshot = cfg.snapshot();
  if (fs::exists(dir) && !is_empty_dir(dir)) {
    if (!cfg.resume) {
      throw ValidationError("out", dir.string() + " exists and is not empty; pass --resume to continue it");
    }
    const fs::path prior = dir / "run_config.kv";
    std::ifstream in(prior);
    const std::string text(std::istreambuf_iterator<char>(in), {});
    if (!in.is_open() || text != snapshot) {
      throw ValidationError("resume", dir.string() + " was produced by a different configuration");
    }
    if (fs::exists(dir / "manifest.json")) {
      const RunManifest m = RunManifest::load(dir / "manifest.json");
      if (m.kind != to_string(cfg.kind) || m.seed != cfg.seed || m.config != snapshot) {
        throw ValidationError("resume", "manifest in " + dir.string() + " is incompatible");
      }
    }
  }
  ArtifactWriter w(dir);
  fs::remove(dir / "manifest.json");

  RunManifest m;
  m.kind = to_string(cfg.kind);
  m.code_version = code_version();
  m.seed = cfg.seed;
  m.config = snapshot;
  m.started_at = utc_timestamp();
  w.write("run_config.kv", snapshot);

  PipelineResult r;
  switch (cfg.kind) {
    case ExperimentKind::grid: r = run_grid(cfg, w, log); break;
    case ExperimentKind::bayes: r = run_bayes(cfg, w, log); break;
    case ExperimentKind::ppo_train: r = run_ppo_train(cfg, w, log); break;
    case ExperimentKind::ppo_eval: r = run_ppo_eval(cfg, w, log); break;
    case ExperimentKind::compare: r = run_compare(cfg, w, log); break;
  }
  m.finished_at = utc_timestamp();
  m.exit_code = r.exit_code;
  m.notes = r.notes;
  m.artifacts = w.records();
  write_file_atomic(dir / "manifest.json", m.to_json());
  return {m, r.exit_code};
}

}  // namespace sgl::experiment
