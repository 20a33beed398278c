#include "fibrebend/plot.hpp"

#include "fibrebend/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fibrebend {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.2;
};

Axis make_axis(double lo, double hi) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    lo -= pad;
    hi += pad;
  }
  Axis a;
  a.step = nice_step(hi - lo);
  a.lo = std::floor(lo / a.step) * a.step;
  a.hi = std::ceil(hi / a.step) * a.step;
  return a;
}

std::pair<std::string, std::string> labels(PlotKind kind) {
  switch (kind) {
    case PlotKind::AnglePressure: return {"Pressure (kPa)", "Bending angle (deg)"};
    case PlotKind::ExpansionPressure: return {"Pressure (kPa)", "Radial expansion (mm)"};
    case PlotKind::Trajectory: return {"z (mm)", "y (mm)"};
    case PlotKind::Hysteresis: return {"Pressure (kPa)", "Bending angle (deg)"};
  }
  return {"", ""};
}

std::string tick(double v) {
  if (std::abs(v) < 1e-9) v = 0.0;
  return fmt::format("{:g}", std::round(v * 1e6) / 1e6);
}

}  // namespace

std::string render_plot(PlotKind kind, const std::vector<Series>& input, const std::string& title) {
  if (input.empty()) throw ValidationError("plot: no series");
  for (const auto& s : input) {
    if (s.x.empty()) throw ValidationError("plot: empty series '" + s.label + "'");
    if (s.x.size() != s.y.size()) throw ValidationError("plot: series '" + s.label + "' has mismatched x and y");
  }
  std::vector<Series> series = input;
  if (kind == PlotKind::Hysteresis) {
    if (series.size() != 2) throw ValidationError("plot: hysteresis needs forward and backward series");
    if (series[0].x.size() != series[1].x.size())
      throw ValidationError("plot: forward and backward series differ in length");
    Series gap{"gap |bwd - fwd| (deg)", series[0].x, {}};
    for (std::size_t i = 0; i < series[0].x.size(); ++i) {
      // backward leg may be stored in unloading order
      const double p = series[0].x[i];
      std::size_t j = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < series[1].x.size(); ++k)
        if (std::abs(series[1].x[k] - p) < best) best = std::abs(series[1].x[k] - p), j = k;
      if (best > 1e-9 * std::max(1.0, std::abs(p)))
        throw ValidationError("plot: forward and backward series use different pressures");
      gap.y.push_back(std::abs(series[1].y[j] - series[0].y[i]));
    }
    series.push_back(std::move(gap));
  }

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  for (double v : {x0, x1, y0, y1})
    if (!std::isfinite(v)) throw ValidationError("plot: non-finite value");
  const Axis ax = make_axis(x0, x1);
  const Axis ay = make_axis(y0, y1);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto sy = [&](double v) { return kTop + ph - (v - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:g}\" height=\"{:g}\" viewBox=\"0 0 {:g} {:g}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:g}\" height=\"{:g}\" fill=\"white\"/>\n", kWidth, kHeight);
  if (!title.empty())
    out += fmt::format("<text x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kLeft + pw / 2.0, escape(title));

  out += "<g class=\"axes\" stroke=\"#000\" stroke-width=\"1\">\n";
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\"/>\n", kLeft, kTop + ph, kLeft + pw,
                     kTop + ph);
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\"/>\n", kLeft, kTop, kLeft, kTop + ph);
  out += "</g>\n<g class=\"ticks\">\n";
  for (double v = ax.lo; v <= ax.hi + 1e-9 * ax.step; v += ax.step) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#000\"/>\n", sx(v),
                       kTop + ph, kTop + ph + 5.0);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", sx(v), kTop + ph + 18.0,
                       tick(v));
  }
  for (double v = ay.lo; v <= ay.hi + 1e-9 * ay.step; v += ay.step) {
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#000\"/>\n", kLeft - 5.0,
                       sy(v), kLeft, sy(v));
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 8.0, sy(v) + 4.0,
                       tick(v));
  }
  out += "</g>\n";
  const auto [xl, yl] = labels(kind);
  out += fmt::format("<text class=\"xlabel\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + pw / 2.0, kHeight - 15.0, escape(xl));
  out += fmt::format(
      "<text class=\"ylabel\" x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}"
      "</text>\n",
      kTop + ph / 2.0, escape(yl));

  out += "<g class=\"data\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = kColours[i % std::size(kColours)];
    const bool dashed = kind == PlotKind::Hysteresis && i == 2;
    if (s.x.size() == 1) {
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\" stroke=\"none\"/>\n", sx(s.x[0]),
                         sy(s.y[0]), colour);
      continue;
    }
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) pts += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", sx(s.x[k]), sy(s.y[k]));
    out += fmt::format("<polyline points=\"{}\" stroke=\"{}\"{}/>\n", pts, colour,
                       dashed ? " stroke-dasharray=\"6 4\"" : "");
  }
  out += "</g>\n<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = kTop + 10.0 + 18.0 * static_cast<double>(i);
    const double lx = kLeft + pw + 15.0;
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       lx, ly, lx + 20.0, ly, kColours[i % std::size(kColours)]);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 26.0, ly + 4.0, escape(series[i].label));
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace fibrebend
