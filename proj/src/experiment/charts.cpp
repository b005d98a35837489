#include "sgl/experiment/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sgl/errors.hpp"
#include "sgl/experiment/csv.hpp"
#include "sgl/kv_config.hpp"

namespace sgl::experiment {

namespace {

constexpr int kJoints = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string color(const std::string& controller) {
  switch (controller_rank(controller)) {
    case 0: return "#1f77b4";
    case 1: return "#ff7f0e";
    case 2: return "#2ca02c";
    default: return "#7f7f7f";
  }
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

template <class Series>
void order_series(std::vector<Series>& series) {
  std::stable_sort(series.begin(), series.end(), [](const Series& a, const Series& b) {
    const int ra = controller_rank(a.controller), rb = controller_rank(b.controller);
    return ra != rb ? ra < rb : (ra == 3 && a.controller < b.controller);
  });
}

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n"
         "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
         "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(title) + "</text>\n";
}

std::string axes(const PlotArea& a, const std::string& xlabel, const std::string& ylabel) {
  return "<g class=\"axes\" stroke=\"black\">\n<line x1=\"" + num(a.left) + "\" y1=\"" + num(a.bottom) + "\" x2=\"" +
         num(a.right) + "\" y2=\"" + num(a.bottom) + "\"/>\n<line x1=\"" + num(a.left) + "\" y1=\"" + num(a.top) +
         "\" x2=\"" + num(a.left) + "\" y2=\"" + num(a.bottom) + "\"/>\n</g>\n<text x=\"" +
         num((a.left + a.right) / 2) + "\" y=\"575\" text-anchor=\"middle\" font-size=\"14\">" + escape(xlabel) +
         "</text>\n<text x=\"20\" y=\"" + num((a.top + a.bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 " + num((a.top + a.bottom) / 2) +
         ")\">" + escape(ylabel) + "</text>\n";
}

std::string legend(const std::vector<std::string>& controllers, const std::string& shape) {
  std::string out = "<g class=\"legend\">\n";
  double y = 70.0;
  for (const auto& c : controllers) {
    const std::string col = color(c);
    out += shape == "circle" ? "<circle cx=\"665\" cy=\"" + num(y - 4) + "\" r=\"5\" fill=\"" + col + "\"/>"
                             : "<rect x=\"660\" y=\"" + num(y - 10) + "\" width=\"10\" height=\"10\" fill=\"" + col + "\"/>";
    out += "<text x=\"678\" y=\"" + num(y) + "\" font-size=\"13\">" + escape(c) + "</text>\n";
    y += 22.0;
  }
  return out + "</g>\n";
}

}  // namespace

int controller_rank(const std::string& controller) {
  if (controller == "grid") return 0;
  if (controller == "bayes") return 1;
  if (controller == "ppo") return 2;
  return 3;
}

Range fit_axis(double min, double max) {
  if (!(std::isfinite(min) && std::isfinite(max)) || min > max) throw ValidationError("axis", "invalid data range");
  double span = max - min;
  if (span == 0.0) span = min != 0.0 ? std::abs(min) : 1.0;
  return {min - 0.05 * span, max + 0.05 * span};
}

double ScatterLayout::map_x(double v) const {
  return area.left + (v - x.lo) / (x.hi - x.lo) * (area.right - area.left);
}

double ScatterLayout::map_y(double p) const {
  return area.bottom - (p - y.lo) / (y.hi - y.lo) * (area.bottom - area.top);
}

ScatterLayout scatter_layout(const std::vector<ScatterSeries>& series) {
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin, pmin = vmin, pmax = -vmin;
  std::size_t count = 0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      vmin = std::min(vmin, p.velocity);
      vmax = std::max(vmax, p.velocity);
      pmin = std::min(pmin, p.power);
      pmax = std::max(pmax, p.power);
      ++count;
    }
  }
  if (count == 0) throw ValidationError("results", "scatter needs at least one point");
  return ScatterLayout{fit_axis(vmin, vmax), fit_axis(pmin, pmax), PlotArea{}};
}

ChartOutput emit_scatter(std::vector<ScatterSeries> series) {
  order_series(series);
  const ScatterLayout layout = scatter_layout(series);
  std::vector<std::string> rows;
  std::vector<std::string> names;
  std::string marks;
  for (const auto& s : series) {
    names.push_back(s.controller);
    marks += "<g class=\"marker-" + escape(s.controller) + "\" fill=\"" + color(s.controller) + "\">\n";
    for (const auto& p : s.points) {
      const std::string appv = p.velocity > 0.0 ? format_double(p.power / p.velocity) : "nan";
      rows.push_back(s.controller + "," + format_double(p.velocity) + "," + format_double(p.power) + "," + appv);
      marks += "<circle cx=\"" + num(layout.map_x(p.velocity)) + "\" cy=\"" + num(layout.map_y(p.power)) +
               "\" r=\"3\"/>\n";
    }
    marks += "</g>\n";
  }
  std::string svg = svg_open("Velocity vs. power") + axes(layout.area, "mean velocity (m/s)", "mean power (W)");
  svg += "<g class=\"ticks\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = layout.x.lo + (layout.x.hi - layout.x.lo) * i / 4.0;
    const double p = layout.y.lo + (layout.y.hi - layout.y.lo) * i / 4.0;
    svg += "<text x=\"" + num(layout.map_x(v)) + "\" y=\"548\" text-anchor=\"middle\">" + tick_label(v) + "</text>\n";
    svg += "<text x=\"84\" y=\"" + num(layout.map_y(p) + 4) + "\" text-anchor=\"end\">" + tick_label(p) + "</text>\n";
  }
  svg += "</g>\n" + marks + legend(names, "circle") + "</svg>\n";
  return {csv_document(scatter_schema(), rows), svg};
}

ChartOutput emit_power_profile(std::vector<ProfileSeries> series, const std::string& velocity_label) {
  if (series.empty()) throw ValidationError("per_joint", "no controllers");
  for (const auto& s : series) {
    if (static_cast<int>(s.watts.size()) != kJoints) {
      throw ValidationError("per_joint", s.controller + " has " + std::to_string(s.watts.size()) + " values, expected 8");
    }
  }
  order_series(series);
  double top = 0.0;
  for (const auto& s : series)
    for (double w : s.watts) top = std::max(top, w);
  const Range y{0.0, top > 0.0 ? top * 1.05 : 1.0};
  const PlotArea a;
  const double group = (a.right - a.left) / kJoints;
  const double bar = group * 0.8 / static_cast<double>(series.size());

  std::vector<std::string> rows;
  for (int j = 0; j < kJoints; ++j)
    for (const auto& s : series) rows.push_back(std::to_string(j + 1) + "," + s.controller + "," + format_double(s.watts[j]));

  std::string svg = svg_open("Per-joint power at " + velocity_label) + axes(a, "joint", "mean power (W)");
  svg += "<g class=\"ticks\" font-size=\"11\">\n";
  for (int j = 0; j < kJoints; ++j) {
    svg += "<text x=\"" + num(a.left + group * (j + 0.5)) + "\" y=\"548\" text-anchor=\"middle\">" +
           std::to_string(j + 1) + "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double w = y.hi * i / 4.0;
    const double py = a.bottom - w / y.hi * (a.bottom - a.top);
    svg += "<text x=\"84\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + tick_label(w) + "</text>\n";
  }
  svg += "</g>\n";
  std::vector<std::string> names;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    names.push_back(s.controller);
    svg += "<g class=\"bar-" + escape(s.controller) + "\" fill=\"" + color(s.controller) + "\">\n";
    for (int j = 0; j < kJoints; ++j) {
      const double h = s.watts[j] / y.hi * (a.bottom - a.top);
      const double x = a.left + group * j + group * 0.1 + bar * static_cast<double>(k);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(a.bottom - h) + "\" width=\"" + num(bar) + "\" height=\"" +
             num(h) + "\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += legend(names, "rect") + "</svg>\n";
  return {csv_document(power_profile_schema(), rows), svg};
}

}  // namespace sgl::experiment
