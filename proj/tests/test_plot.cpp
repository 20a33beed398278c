#include "fibrebend/errors.hpp"
#include "fibrebend/plot.hpp"

#include <gtest/gtest.h>

using namespace fibrebend;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const Series kForward{"loading", {0, 50, 100}, {0, 40, 90}};
const Series kBackward{"unloading", {100, 50, 0}, {90, 45, 2}};

}  // namespace

TEST(Plot, SinglePointDrawnAsMarker) {
  const std::string svg = render_plot(PlotKind::AnglePressure, {{"30 turns SH", {100}, {90}}});
  EXPECT_EQ(count(svg, "<circle"), 1u);
  EXPECT_EQ(count(svg, "<polyline"), 0u);
}

TEST(Plot, AxesCarryUnitsAndLegend) {
  const std::string svg = render_plot(PlotKind::ExpansionPressure, {{"18 turns SH", {0, 50, 93}, {0, 1.3, 2.6}}}, "a & b");
  EXPECT_EQ(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0), 0u);
  EXPECT_NE(svg.find("Pressure (kPa)"), std::string::npos);
  EXPECT_NE(svg.find("Radial expansion (mm)"), std::string::npos);
  EXPECT_NE(svg.find("class=\"legend\""), std::string::npos);
  EXPECT_NE(svg.find(">18 turns SH<"), std::string::npos);
  EXPECT_NE(svg.find("a &amp; b"), std::string::npos);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
}

TEST(Plot, TrajectoryLabels) {
  const std::string svg = render_plot(PlotKind::Trajectory, {{"tip", {37.5, 30, 20}, {2.5, -5, -12}}});
  EXPECT_NE(svg.find("z (mm)"), std::string::npos);
  EXPECT_NE(svg.find("y (mm)"), std::string::npos);
}

TEST(Plot, HysteresisAddsDashedGap) {
  const std::string svg = render_plot(PlotKind::Hysteresis, {kForward, kBackward});
  EXPECT_EQ(count(svg, "<polyline"), 3u);
  EXPECT_EQ(count(svg, "stroke-dasharray"), 1u);
  EXPECT_NE(svg.find("gap"), std::string::npos);
}

TEST(Plot, InvalidInputRejected) {
  EXPECT_THROW(render_plot(PlotKind::AnglePressure, {}), ValidationError);
  EXPECT_THROW(render_plot(PlotKind::AnglePressure, {{"x", {}, {}}}), ValidationError);
  EXPECT_THROW(render_plot(PlotKind::AnglePressure, {{"x", {0, 1}, {0}}}), ValidationError);
  EXPECT_THROW(render_plot(PlotKind::Hysteresis, {kForward}), ValidationError);
  EXPECT_THROW(render_plot(PlotKind::Hysteresis, {kForward, {"b", {100, 55, 0}, {90, 45, 2}}}), ValidationError);
  EXPECT_THROW(render_plot(PlotKind::Hysteresis, {kForward, {"b", {100, 0}, {90, 2}}}), ValidationError);
}

TEST(Plot, Deterministic) {
  EXPECT_EQ(render_plot(PlotKind::Hysteresis, {kForward, kBackward}),
            render_plot(PlotKind::Hysteresis, {kForward, kBackward}));
}

TEST(Plot, FlatSeriesStillGetsAnAxisRange) {
  const std::string svg = render_plot(PlotKind::AnglePressure, {{"flat", {0, 100}, {0, 0}}});
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}
