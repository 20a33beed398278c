#pragma once

// Measurements on node-displacement histories (FEM exports or synthetic
// fields) and bench logs: bending angle, radial expansion from surface
// node pairs, hysteresis.

#include "fibrebend/geometry.hpp"
#include "fibrebend/schedule.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <map>
#include <vector>

namespace fibrebend {

struct NodeHistory {
  long long node_id = 0;
  Vec3 initial = Vec3::Zero();
  std::vector<double> times;  // strictly increasing
  Eigen::Matrix3Xd displacements;

  /// Displacement at `t`, linearly interpolated; throws outside the sampled span.
  Vec3 displacement_at(double t) const;
  Vec3 position_at(double t) const { return initial + displacement_at(t); }
};

void validate(const NodeHistory& h);

using HistoryMap = std::map<long long, NodeHistory>;

struct Node {
  long long id = 0;
  Vec3 xyz = Vec3::Zero();
};

/// Midpoint of the flat-side bottom edge of the base cap.
Vec3 reference_point(const ActuatorSpec& spec);

/// Angle (deg) between the initial and current reference-to-tip vectors.
double bending_angle(const Vec3& ref, const Vec3& tip_initial, const Vec3& tip_current);
double bending_angle(const Vec3& ref, const NodeHistory& tip, double t);

struct RadialPair {
  long long flat_node = 0;
  long long curved_node = 0;
  double station_z = 0.0;
  double initial_distance = 0.0;  // local wall thickness
};

/// Pairs a flat-side centreline node with the opposite crown node at
/// `n_pairs` axial stations `spacing` apart from the chamber start. Stations
/// past the chamber end are clamped to it. Each target takes the nearest
/// node within spacing / 2; ties go to the lowest id.
std::vector<RadialPair> select_radial_pairs(const std::vector<Node>& nodes, const ActuatorSpec& spec,
                                            int n_pairs = 12, double spacing = 2.5);

struct ExpansionPoint {
  double mean = 0.0;
  std::vector<double> per_pair;
};

ExpansionPoint radial_expansion(const std::vector<RadialPair>& pairs, const HistoryMap& histories, double t);

struct AngleSeries {
  std::vector<double> pressures;
  std::vector<double> theta;
};

struct HysteresisResult {
  double ratio_pct = 0.0;            // max gap over peak forward angle
  double loop_area_ratio_pct = 0.0;  // area between the legs over area under the forward leg
  std::vector<double> pressures;     // ascending
  std::vector<double> gap;           // |bwd - fwd| per pressure, deg
};

/// Both legs must be sampled at the same pressures (any order).
HysteresisResult hysteresis_ratio(const AngleSeries& forward, const AngleSeries& backward);

/// Splits a loading/unloading record at its first peak pressure.
std::pair<AngleSeries, AngleSeries> split_legs(const AngleSeries& record);

// ---------------------------------------------------------------------------
// Ingestion

/// `node_id,x0,y0,z0` sidecar plus `node_id,t,ux_mm,uy_mm,uz_mm` histories.
HistoryMap load_histories(const std::string& nodes_csv, const std::string& displacements_csv);
std::vector<Node> nodes_of(const HistoryMap& histories);

/// `pressure_kPa,theta_deg,timestamp` bench log.
AngleSeries load_bench_log(const std::string& csv);

struct AnalysisRow {
  double t = 0.0;
  double pressure = 0.0;
  double theta = 0.0;
  double mean_expansion = 0.0;
};

/// Angle and mean expansion at every time sampled by the tip history.
std::vector<AnalysisRow> analyze_histories(const HistoryMap& histories, const ActuatorSpec& spec, long long tip_node,
                                           const PressureSchedule& schedule, int n_pairs = 12, double spacing = 2.5);

std::string analysis_csv(const std::vector<AnalysisRow>& rows);
std::string hysteresis_csv(const HysteresisResult& h);

}  // namespace fibrebend
