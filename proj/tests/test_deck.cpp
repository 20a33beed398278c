#include "fibrebend/deck.hpp"
#include "fibrebend/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace fibrebend;

namespace {

FemDeck deck_a() {
  const ActuatorSpec spec = build_geometry_a({});
  return emit_deck(spec, {generate_helix(spec, {})}, MaterialLibrary::defaults(), ProportionalSchedule{});
}

FemDeck deck_b() {
  const ActuatorSpec spec = build_geometry_b({});
  WindingSpec w;
  w.chirality = Chirality::CW;
  const FiberPath first = generate_helix(spec, w);
  return emit_deck(spec, {first, mirror_path(first)}, MaterialLibrary::defaults(), ProportionalSchedule{});
}

std::size_t count_lines(const std::string& text, const std::string& prefix) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find("\n" + prefix, pos)) != std::string::npos) {
    ++n;
    ++pos;
  }
  return n;
}

}  // namespace

TEST(Deck, RoundTripRestoresEveryField) {
  for (const FemDeck& d : {deck_a(), deck_b()}) {
    const FemDeck back = parse_deck(serialize(d));
    EXPECT_EQ(back, d);
    EXPECT_EQ(serialize(back), serialize(d));
  }
}

TEST(Deck, ByteDeterministic) {
  EXPECT_EQ(serialize(deck_a()), serialize(deck_a()));
  EXPECT_EQ(serialize(deck_b()), serialize(deck_b()));
}

TEST(Deck, StatementCountsForGeometryA) {
  const FemDeck d = deck_a();
  EXPECT_EQ(d.solids.size(), 1u);
  ASSERT_EQ(d.fibres.size(), 1u);
  EXPECT_EQ(d.fibres[0].polylines.size(), 1u);
  EXPECT_EQ(d.boundaries.size(), 1u);
  EXPECT_EQ(d.loads.size(), 1u);
  EXPECT_DOUBLE_EQ(d.loads[0].magnitude, 100.0);

  const std::string text = serialize(d);
  EXPECT_EQ(text.rfind("FIBREBEND-DECK version=1\n", 0), 0u);
  EXPECT_EQ(count_lines(text, "*BOUNDARY type=ENCASTRE"), 1u);
  EXPECT_EQ(count_lines(text, "*LOAD type=PRESSURE"), 1u);
  EXPECT_EQ(count_lines(text, "*SOLID_GROUP"), 1u);
  EXPECT_NE(text.find("\n*END"), std::string::npos);
}

TEST(Deck, GeometryBLoadsBothChambers) {
  const FemDeck d = deck_b();
  ASSERT_EQ(d.loads.size(), 2u);
  EXPECT_EQ(d.loads[0].surface, "CHAMBER_0");
  EXPECT_EQ(d.loads[1].surface, "CHAMBER_1");
  ASSERT_EQ(d.fibres.size(), 1u);
  EXPECT_EQ(d.fibres[0].polylines.size(), 2u);
  EXPECT_EQ(d.boundaries.size(), 1u);
}

TEST(Deck, MaterialsCarryFibreRadius) {
  const FemDeck d = deck_a();
  const auto it = std::find_if(d.materials.begin(), d.materials.end(), [](const auto& m) { return m.name == "kevlar"; });
  ASSERT_NE(it, d.materials.end());
  EXPECT_DOUBLE_EQ(d.fibres[0].radius, 0.103);
}

TEST(Deck, MissingBoundarySurfaceRejected) {
  FemDeck d = deck_a();
  d.surfaces.erase(d.surfaces.begin());  // CAP_BASE
  EXPECT_THROW(validate(d), ValidationError);

  std::string text = serialize(deck_a());
  const auto pos = text.find("*SURFACE name=CAP_BASE");
  ASSERT_NE(pos, std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  EXPECT_THROW(parse_deck(text), ValidationError);
}

TEST(Deck, MalformedTextRejected) {
  EXPECT_THROW(parse_deck(""), ValidationError);
  EXPECT_THROW(parse_deck("FIBREBEND-DECK version=2\n*END\n"), ValidationError);
  std::string text = serialize(deck_a());
  EXPECT_THROW(parse_deck(text.substr(0, text.rfind("*END"))), ValidationError);
  const auto pos = text.find("*LOAD");
  EXPECT_THROW(parse_deck(text.substr(0, pos) + "*FROB x=1\n" + text.substr(pos)), ValidationError);
}

TEST(Amplitude, EndpointsAndMidpoint) {
  EXPECT_EQ(smooth_amplitude(0.0), 0.0);
  EXPECT_EQ(smooth_amplitude(1.0), 1.0);
  EXPECT_DOUBLE_EQ(smooth_amplitude(0.5), 0.5);
  EXPECT_THROW(smooth_amplitude(-0.01), ValidationError);
  EXPECT_THROW(smooth_amplitude(1.01), ValidationError);
}

TEST(Amplitude, FlatAtBothEnds) {
  const double h = 1e-5;
  EXPECT_LE(std::abs((smooth_amplitude(h) - smooth_amplitude(0.0)) / h), 1e-8);
  EXPECT_LE(std::abs((smooth_amplitude(1.0) - smooth_amplitude(1.0 - h)) / h), 1e-8);
}

TEST(Amplitude, MonotoneAndSymmetric) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(smooth_amplitude(a), smooth_amplitude(b));
    EXPECT_NEAR(smooth_amplitude(a) + smooth_amplitude(1.0 - a), 1.0, 1e-14);
  }
}
