#include "sgl/param_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "sgl/errors.hpp"
#include "sgl/parallel.hpp"
#include "sgl/simulator.hpp"

namespace sgl {
namespace {

std::vector<double> arithmetic(double first, double step, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = first + step * i;
  return v;
}

}  // namespace

GridSpec GridSpec::standard() {
  return GridSpec{arithmetic(0.25, 0.25, 12), {0.1, 0.2, 0.3, 0.4}, arithmetic(40.0, 10.0, 15),
                  arithmetic(40.0, 10.0, 9)};
}

std::vector<GaitParams> enumerate_grid(const GridSpec& spec) {
  std::vector<GaitParams> out;
  out.reserve(spec.size());
  for (double omega : spec.omega_values)
    for (double y : spec.y_values)
      for (double a : spec.amplitude_values)
        for (double l : spec.lambda_values) out.push_back(GaitParams::make(omega, y, a, l));
  return out;
}

EvalResult evaluate_gait(const GaitParams& params, const RobotModel& model,
                         const RunProtocol& protocol) {
  if (protocol.warmup < 0 || protocol.steps <= protocol.warmup) {
    throw ValidationError("steps", "must exceed warmup");
  }
  const RobotConfig& cfg = model.config();
  const int joints = model.num_joints();
  Simulator sim(model);
  SimState state = reset(model);
  PowerTrace trace(joints, cfg.gear);
  Vec2 window_start = state.com_position;
  try {
    for (int i = 0; i < protocol.steps; ++i) {
      if (i == protocol.warmup) window_start = state.com_position;
      const std::vector<double> targets = targets_at(params, state.sim_time, joints, cfg.joint_limit);
      const StepInfo info = sim.step(state, targets);
      trace.append(info.torques, info.joint_velocities, info.head_velocity);
    }
  } catch (const SimulationDiverged& e) {
    throw GaitEvaluationError(params, e.what());
  }
  double distance = (state.com_position - window_start).norm();
  if (distance < kStaticDisplacement) distance = 0.0;
  const double duration = (protocol.steps - protocol.warmup) * cfg.control_dt;
  return summarize_run(trace, model, distance, duration, protocol.warmup);
}

std::vector<GridRecord> grid_search(const GridSpec& spec, const RobotModel& model,
                                    const GridOptions& options) {
  const std::vector<GaitParams> points = enumerate_grid(spec);
  std::vector<GridRecord> records(points.size());
  std::vector<char> done(points.size(), 0);
  for (const GridRecord& r : options.completed) {
    if (r.index >= points.size() || !(r.params == points[r.index])) {
      throw ValidationError("completed", "record " + std::to_string(r.index) + " does not match the grid");
    }
    records[r.index] = r;
    done[r.index] = 1;
  }
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!done[i]) todo.push_back(i);

  std::mutex sink;
  parallel_for(todo.size(), options.workers, [&](std::size_t k) {
    const std::size_t i = todo[k];
    GridRecord rec;
    rec.index = i;
    rec.params = points[i];
    try {
      rec.result = evaluate_gait(points[i], model, options.protocol);
    } catch (const GaitEvaluationError& e) {
      rec.error = e.what();
    }
    std::lock_guard lock(sink);
    records[i] = rec;
    if (options.on_record) options.on_record(records[i]);
  });
  return records;
}

std::vector<FrontierPoint> velocity_frontier(const std::vector<VelocityPower>& points,
                                             double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin_width", "must be positive");
  if (points.empty()) return {};
  double vmax = 0.0;
  for (const auto& p : points) vmax = std::max(vmax, p.velocity);
  const int bins = static_cast<int>(std::floor(vmax / bin_width)) + 1;
  std::vector<char> occupied(bins, 0);
  for (const auto& p : points)
    if (p.velocity >= 0.0) occupied[static_cast<int>(std::floor(p.velocity / bin_width))] = 1;

  // Suffix minimum over velocity-sorted points.
  std::vector<VelocityPower> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.velocity < b.velocity; });
  std::vector<VelocityPower> best_from(sorted.size());
  for (std::size_t i = sorted.size(); i-- > 0;) {
    best_from[i] = sorted[i];
    if (i + 1 < sorted.size() && best_from[i + 1].power < sorted[i].power) best_from[i] = best_from[i + 1];
  }
  std::vector<FrontierPoint> out;
  for (int b = 0; b < bins; ++b) {
    if (!occupied[b]) continue;
    const double lo = b * bin_width;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), lo,
                                     [](const auto& p, double v) { return p.velocity < v; });
    const VelocityPower& best = best_from[it - sorted.begin()];
    out.push_back({lo, best.velocity, best.power});
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("pearson", "need two equal-length series");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace sgl
