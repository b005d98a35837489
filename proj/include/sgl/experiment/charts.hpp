#pragma once

// Velocity-power scatter and per-joint power bar charts as CSV plus SVG.

#include <string>
#include <vector>

#include "sgl/param_search.hpp"

namespace sgl::experiment {

inline constexpr double kCanvasWidth = 800.0;
inline constexpr double kCanvasHeight = 600.0;

/// Legend position of a controller: grid, bayes, ppo, then anything else.
int controller_rank(const std::string& controller);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// Data extent widened by 5% of its span on both sides.
Range fit_axis(double min, double max);

struct PlotArea {
  double left = 90.0, top = 50.0, right = 640.0, bottom = 530.0;
};

struct ScatterLayout {
  Range x, y;
  PlotArea area;

  double map_x(double v) const;
  double map_y(double p) const;
};

struct ScatterSeries {
  std::string controller;
  std::vector<VelocityPower> points;
};

struct ChartOutput {
  std::string csv;
  std::string svg;
};

ScatterLayout scatter_layout(const std::vector<ScatterSeries>& series);
ChartOutput emit_scatter(std::vector<ScatterSeries> series);

struct ProfileSeries {
  std::string controller;
  std::vector<double> watts;  // one per joint, joint 1 first
};

ChartOutput emit_power_profile(std::vector<ProfileSeries> series, const std::string& velocity_label);

}  // namespace sgl::experiment
