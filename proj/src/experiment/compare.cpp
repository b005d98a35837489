#include "sgl/experiment/compare.hpp"

#include <cmath>
#include <cstdio>

#include "sgl/errors.hpp"
#include "sgl/experiment/csv.hpp"
#include "sgl/kv_config.hpp"

namespace sgl::experiment {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

}  // namespace

std::string CompareRow::csv_row() const {
  return format_double(target_velocity) + "," + format_double(ppo_velocity) + "," + opt(ppo_appv) + "," +
         (grid ? format_double(grid->velocity) : "nan") + "," + (grid ? opt(grid->appv) : "nan") + "," +
         opt(grid_ratio) + "," + (bayes ? format_double(bayes->velocity) : "nan") + "," +
         (bayes ? opt(bayes->appv) : "nan") + "," + opt(bayes_ratio) + "," +
         (comparable() ? "ok" : "incomparable");
}

int CompareReport::comparable_windows() const {
  int n = 0;
  for (const auto& r : rows) n += r.comparable();
  return n;
}

int CompareReport::ppo_not_worse() const {
  int n = 0;
  for (const auto& r : rows) n += r.comparable() && *r.grid_ratio <= 1.0;
  return n;
}

std::optional<double> CompareReport::savings_near(double velocity) const {
  const CompareRow* best = nullptr;
  for (const auto& r : rows) {
    if (!best || std::abs(r.target_velocity - velocity) < std::abs(best->target_velocity - velocity)) best = &r;
  }
  if (!best || !best->comparable()) return std::nullopt;
  return 1.0 - *best->grid_ratio;
}

std::string CompareReport::csv() const {
  std::vector<std::string> lines;
  for (const auto& r : rows) lines.push_back(r.csv_row());
  return csv_document(compare_schema(), lines);
}

std::vector<std::string> CompareReport::summary_lines() const {
  std::vector<std::string> out;
  char buf[256];
  for (const auto& r : rows) {
    if (!r.comparable()) {
      std::snprintf(buf, sizeof buf, "v_t=%.3f ppo_v=%.4f incomparable", r.target_velocity, r.ppo_velocity);
    } else {
      std::snprintf(buf, sizeof buf, "v_t=%.3f ppo_v=%.4f ppo_appv=%.4g grid_appv=%.4g ratio=%.3f%s",
                    r.target_velocity, r.ppo_velocity, *r.ppo_appv, *r.grid->appv, *r.grid_ratio,
                    r.bayes_ratio ? (" bayes_ratio=" + format_double(std::round(*r.bayes_ratio * 1000) / 1000)).c_str()
                                  : "");
    }
    out.emplace_back(buf);
  }
  std::snprintf(buf, sizeof buf, "windows: %d comparable of %zu; ppo APPV <= grid in %d", comparable_windows(),
                rows.size(), ppo_not_worse());
  out.emplace_back(buf);
  const auto s = savings_near(0.15);
  out.push_back("savings vs grid near 0.15 m/s: " + (s ? percent(*s) : std::string("incomparable")) +
                " (reference target 35%-65%)");
  return out;
}

std::optional<ControllerPoint> best_in_window(const std::vector<ControllerPoint>& points, double v, double window) {
  std::optional<ControllerPoint> best;
  for (const auto& p : points) {
    if (!p.appv || std::abs(p.velocity - v) > window) continue;
    if (!best || *p.appv < *best->appv) best = p;
  }
  return best;
}

CompareReport compare(const std::vector<ControllerPoint>& grid, const std::vector<ControllerPoint>& bayes,
                      const std::vector<PpoPoint>& ppo, double window) {
  if (!(window > 0.0)) throw ValidationError("window", "must be positive");
  CompareReport report;
  report.window = window;
  for (const auto& p : ppo) {
    CompareRow row;
    row.target_velocity = p.target_velocity;
    row.ppo_velocity = p.point.velocity;
    row.ppo_appv = p.point.appv;
    if (p.point.appv) {
      row.grid = best_in_window(grid, p.point.velocity, window);
      row.bayes = best_in_window(bayes, p.point.velocity, window);
      if (row.grid) row.grid_ratio = *p.point.appv / *row.grid->appv;
      if (row.bayes) row.bayes_ratio = *p.point.appv / *row.bayes->appv;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace sgl::experiment
