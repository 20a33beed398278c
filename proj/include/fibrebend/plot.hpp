#pragma once

// Standalone SVG line plots with axes, units and a legend.

#include <string>
#include <vector>

namespace fibrebend {

enum class PlotKind { AnglePressure, ExpansionPressure, Trajectory, Hysteresis };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Series with one point are drawn as a marker, longer ones as a polyline.
/// Hysteresis expects exactly two series (forward, backward) on the same
/// pressures and adds their gap curve.
std::string render_plot(PlotKind kind, const std::vector<Series>& series, const std::string& title = "");

}  // namespace fibrebend
