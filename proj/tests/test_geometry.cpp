#include "fibrebend/errors.hpp"
#include "fibrebend/geometry.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fibrebend;

namespace {

constexpr double kPi = std::numbers::pi;

ClosedCurve circle(double r) { return {{ArcSegment{Vec2::Zero(), r, 0.0, 2.0 * kPi}}}; }

ClosedCurve half_disc(double r) {
  return {{ArcSegment{Vec2::Zero(), r, 0.0, kPi}, LineSegment{Vec2(-r, 0.0), Vec2(r, 0.0)}}};
}

}  // namespace

TEST(Curves, CircleAreaMatchesClosedForm) {
  EXPECT_NEAR(enclosed_area(circle(7.0)), kPi * 49.0, 1e-12);
  EXPECT_NEAR(polygon_area(sample_curve(circle(7.0), 4096)), kPi * 49.0, 1e-3);
  EXPECT_NEAR(curve_length(circle(7.0)), 14.0 * kPi, 1e-12);
}

TEST(Curves, SemicircleAreaMatchesClosedForm) {
  EXPECT_NEAR(enclosed_area(half_disc(7.0)), 76.96902001294993, 1e-10);
  EXPECT_NEAR(curve_length(half_disc(7.0)), 7.0 * kPi + 14.0, 1e-12);
}

TEST(Curves, PointAtArclengthWraps) {
  const ClosedCurve c = half_disc(2.0);
  const double len = curve_length(c);
  EXPECT_LT((point_at_arclength(c, 0.3) - point_at_arclength(c, 0.3 + len)).norm(), 1e-12);
  EXPECT_LT((point_at_arclength(c, -0.3) - point_at_arclength(c, len - 0.3)).norm(), 1e-12);
}

TEST(Curves, DistanceToCurve) {
  EXPECT_NEAR(distance_to_curve(circle(7.0), Vec2(0.0, 0.0)), 7.0, 1e-12);
  EXPECT_NEAR(distance_to_curve(circle(7.0), Vec2(10.0, 0.0)), 3.0, 1e-12);
  EXPECT_NEAR(distance_to_curve(half_disc(7.0), Vec2(0.0, -1.0)), 1.0, 1e-12);
}

TEST(Curves, StripWidthOfCircle) {
  const auto poly = sample_curve(circle(5.0), 8192);
  EXPECT_NEAR(strip_width(poly, 3.0), 8.0, 1e-3);
  EXPECT_EQ(strip_width(poly, 6.0), 0.0);
}

TEST(Curves, SelfIntersectionDetected) {
  Eigen::Matrix2Xd bowtie(2, 4);
  bowtie << 0, 1, 1, 0,
            0, 1, 0, 1;
  EXPECT_TRUE(polygon_self_intersects(bowtie));
  EXPECT_FALSE(polygon_self_intersects(sample_curve(circle(1.0), 64)));
}

TEST(GeometryA, ChamberAreaAnchor) {
  const ActuatorSpec spec = build_geometry_a({});
  EXPECT_NEAR(spec.metrics.cross_section_area, 20.8, 0.2);
  EXPECT_NEAR(spec.metrics.cross_section_area, 20.8, 20.8 * 0.01);
}

TEST(GeometryA, ChamberVolumeAnchor) {
  const ActuatorSpec spec = build_geometry_a({});
  EXPECT_NEAR(spec.metrics.nominal_volume, 552.0, 6.0);
  EXPECT_NEAR(spec.metrics.nominal_volume, spec.metrics.cross_section_area * 26.5, 1e-9);
}

TEST(GeometryA, FrameAndLengths) {
  const ActuatorSpec spec = build_geometry_a({});
  EXPECT_EQ(spec.kind, GeometryKind::A);
  EXPECT_DOUBLE_EQ(spec.flat_y, 2.0);
  EXPECT_DOUBLE_EQ(spec.crown_y, 9.0);
  EXPECT_DOUBLE_EQ(spec.crown_y - spec.flat_y, 7.0);
  EXPECT_DOUBLE_EQ(spec.total_length(), 37.5);
  ASSERT_TRUE(spec.layer.has_value());
  EXPECT_NEAR(spec.layer->y_top - spec.layer->y_bottom, 0.2, 1e-12);
  ASSERT_EQ(spec.chambers.size(), 1u);
  EXPECT_GT(spec.metrics.min_wall(), 0.0);
}

TEST(GeometryA, ChamberSitsInsideEnvelope) {
  const ActuatorSpec spec = build_geometry_a({});
  const auto outer = sample_curve(spec.outer, 2048);
  const auto chamber = sample_curve(spec.chambers[0].boundary, 2048);
  for (Eigen::Index i = 0; i < chamber.cols(); ++i) {
    const Vec2 p = chamber.col(i);
    EXPECT_GT(strip_width(outer, p.y()), 2.0 * std::abs(p.x()) - 1e-9);
    EXPECT_GE(p.y(), spec.layer->y_top);
  }
}

TEST(GeometryA, ChamberExceedingEnvelopeIsRejected) {
  GeometryAParams p;
  p.D_i = 20.0;
  EXPECT_THROW(build_geometry_a(p), ValidationError);
}

TEST(GeometryA, NonPositiveDimensionIsRejected) {
  for (double GeometryAParams::*field : {&GeometryAParams::D_O, &GeometryAParams::L, &GeometryAParams::phi_k}) {
    GeometryAParams p;
    p.*field = 0.0;
    EXPECT_THROW(build_geometry_a(p), ValidationError);
  }
}

TEST(GeometryA, AreaQuadratureConverges) {
  const ActuatorSpec spec = build_geometry_a({});
  const double a1 = chamber_metrics(spec, 1024).cross_section_area;
  const double a2 = chamber_metrics(spec, 2048).cross_section_area;
  EXPECT_LT(std::abs(a2 - a1) / a1, 1e-4);
  EXPECT_NEAR(a2, enclosed_area(spec.chambers[0].boundary), 1e-4 * a2);
}

TEST(GeometryA, DeterministicSerialization) {
  const std::string a = to_json(build_geometry_a({})).dump();
  const std::string b = to_json(build_geometry_a({})).dump();
  EXPECT_EQ(a, b);
}

TEST(GeometryA, JsonRoundTrip) {
  const ActuatorSpec spec = build_geometry_a({});
  const ActuatorSpec back = spec_from_json(to_json(spec));
  EXPECT_EQ(to_json(back).dump(), to_json(spec).dump());
}

TEST(GeometryA, KvOverridesAndTypos) {
  const ActuatorSpec spec = build_from_kv({{"kind", "A"}, {"L", "30"}});
  EXPECT_DOUBLE_EQ(spec.chamber_length, 30.0);
  EXPECT_THROW(build_from_kv({{"kind", "A"}, {"Lenght", "30"}}), ValidationError);
  EXPECT_THROW(build_from_kv({{"kind", "C"}}), ValidationError);
  EXPECT_THROW(build_from_kv({{"L", "thirty"}}), ValidationError);
}

TEST(GeometryB, AreaAndVolumeAnchors) {
  const ActuatorSpec spec = build_geometry_b({});
  ASSERT_EQ(spec.chambers.size(), 2u);
  EXPECT_NEAR(spec.metrics.cross_section_area, 25.13, 0.2);
  EXPECT_NEAR(spec.metrics.nominal_volume, 666.0, 7.0);
  // two circles of diameter 4
  EXPECT_NEAR(spec.metrics.cross_section_area, 2.0 * kPi * 4.0, 1e-3);
}

TEST(GeometryB, MirroredChirality) {
  const ActuatorSpec spec = build_geometry_b({});
  EXPECT_EQ(spec.chambers[0].chirality, Chirality::CW);
  EXPECT_EQ(spec.chambers[1].chirality, Chirality::CCW);
  EXPECT_FALSE(spec.layer.has_value());
}

TEST(GeometryB, OverlappingChambersRejected) {
  GeometryBParams p;
  p.chamber_separation = 0.0;
  EXPECT_THROW(build_geometry_b(p), ValidationError);
  p.chamber_separation = 4.2;  // 0.2 mm web, below the wall floor
  EXPECT_THROW(build_geometry_b(p), ValidationError);
}

TEST(GeometryB, MirrorLeavesMetricsUnchanged) {
  const ActuatorSpec spec = build_geometry_b({});
  const ActuatorSpec m = mirrored(spec);
  EXPECT_NEAR(m.metrics.cross_section_area, spec.metrics.cross_section_area, 1e-12);
  EXPECT_NEAR(m.metrics.nominal_volume, spec.metrics.nominal_volume, 1e-12);
  EXPECT_NEAR(m.metrics.min_wall(), spec.metrics.min_wall(), 1e-9);
  const ActuatorSpec mm = mirrored(m);
  for (std::size_t i = 0; i < spec.chambers.size(); ++i) {
    EXPECT_LT((mm.chambers[i].arc_centre - spec.chambers[i].arc_centre).norm(), 1e-12);
    EXPECT_EQ(mm.chambers[i].chirality, spec.chambers[i].chirality);
  }
}

TEST(CrossSectionCsv, HasEveryCurve) {
  const std::string csv = cross_section_csv(build_geometry_a({}), 64);
  EXPECT_EQ(csv.rfind("curve,x_mm,y_mm\n", 0), 0u);
  EXPECT_NE(csv.find("outer,"), std::string::npos);
  EXPECT_NE(csv.find("chamber1,"), std::string::npos);
  EXPECT_NE(csv.find("layer,"), std::string::npos);
}
