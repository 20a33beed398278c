#pragma once

// Neutral, solver-agnostic FEM exchange deck.
//
// Grammar (UTF-8, one statement per line):
//
//   deck      := header statement* "*END"
//   header    := "FIBREBEND-DECK version=" INT
//   statement := "*" KEYWORD [param ("," param)*] NEWLINE data-line*
//   param     := NAME "=" VALUE
//
// Keywords and their data lines:
//   *GEOMETRY                   one line of JSON (serialized ActuatorSpec)
//   *SURFACE name=, role=
//   *MATERIAL name=, kind=, <coefficients>[, fibre_radius=]
//   *SOLID_GROUP name=, element=
//   *SECTION group=, region=, material=
//   *FIBRE_SET name=, material=, element=, radius=
//   *POLYLINE set=, points=N    N lines "x, y, z"
//   *MERGE a=, b=   /   *TIE a=, b=
//   *BOUNDARY type=ENCASTRE, surface=
//   *AMPLITUDE name=, kind=SMOOTH_STEP, points=N    N lines "xi, a"
//   *LOAD type=PRESSURE, surface=, magnitude=<kPa>, amplitude=
//
// Numbers are written with 17 significant digits so parsing restores them
// exactly.

#include "fibrebend/fiberpath.hpp"
#include "fibrebend/geometry.hpp"
#include "fibrebend/materials.hpp"
#include "fibrebend/schedule.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace fibrebend {

inline constexpr int kDeckVersion = 1;

/// Quintic smooth step a = xi^3 (10 - 15 xi + 6 xi^2) on [0, 1].
double smooth_amplitude(double xi);

struct DeckSurface {
  std::string name;
  std::string role;  // cap_base, chamber_wall, outer
  bool operator==(const DeckSurface&) const = default;
};

struct DeckMaterial {
  std::string name;
  Material material;
  bool operator==(const DeckMaterial&) const = default;
};

struct DeckSection {
  std::string region;
  std::string material;
  bool operator==(const DeckSection&) const = default;
};

struct DeckSolidGroup {
  std::string name;
  std::string element = "C3D10H";
  std::vector<DeckSection> sections;
  bool operator==(const DeckSolidGroup&) const = default;
};

struct DeckFibreSet {
  std::string name;
  std::string material;
  std::string element = "B32";
  double radius = 0.0;
  std::vector<Eigen::Matrix3Xd> polylines;
  bool operator==(const DeckFibreSet& o) const;
};

struct DeckConstraint {
  std::string kind;  // MERGE or TIE
  std::string a;
  std::string b;
  bool operator==(const DeckConstraint&) const = default;
};

struct DeckBoundary {
  std::string type = "ENCASTRE";
  std::string surface;
  bool operator==(const DeckBoundary&) const = default;
};

struct DeckAmplitude {
  std::string name;
  std::string kind = "SMOOTH_STEP";
  std::vector<std::pair<double, double>> points;
  bool operator==(const DeckAmplitude&) const = default;
};

struct DeckLoad {
  std::string type = "PRESSURE";
  std::string surface;
  double magnitude = 0.0;  // kPa
  std::string amplitude;
  bool operator==(const DeckLoad&) const = default;
};

struct FemDeck {
  int version = kDeckVersion;
  nlohmann::json geometry;
  std::vector<DeckSurface> surfaces;
  std::vector<DeckMaterial> materials;
  std::vector<DeckSolidGroup> solids;
  std::vector<DeckFibreSet> fibres;
  std::vector<DeckConstraint> constraints;
  std::vector<DeckBoundary> boundaries;
  std::vector<DeckAmplitude> amplitudes;
  std::vector<DeckLoad> loads;

  bool operator==(const FemDeck&) const = default;
};

/// Checks that every referenced tag, material and amplitude is defined and
/// that there is exactly one encastre.
void validate(const FemDeck& deck);

FemDeck emit_deck(const ActuatorSpec& spec, const std::vector<FiberPath>& paths, const MaterialLibrary& materials,
                  const PressureSchedule& schedule);

std::string serialize(const FemDeck& deck);
FemDeck parse_deck(const std::string& text);

}  // namespace fibrebend
