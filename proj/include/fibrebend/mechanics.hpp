#pragma once

// Reduced-order quasi-static bending model.
//
// The chamber length is split into segments of constant curvature. At each
// pressure a scalar moment balance is solved per segment: the pressure
// moment about the inextensible layer, scaled by a fibre-effectiveness
// factor, against the bending resistance of the cross-section. Radial
// expansion and twist use separate closed forms. Four constants are fitted
// against reference anchors (see `calibrate`).
//
// Pose frame: the actuator bends in the y-z plane towards the flat side
// (-y). Twist shows up as out-of-plane (x) deflection.

#include "fibrebend/fiberpath.hpp"
#include "fibrebend/geometry.hpp"
#include "fibrebend/materials.hpp"
#include "fibrebend/schedule.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace fibrebend {

struct ModelConstants {
  double n0 = 0.0;                  // turns at which fibre effectiveness reaches 1 - 1/e
  double k_twist = 0.0;             // twist metric gain
  double expansion_scale = 0.0;     // hoop-balance gain
  double device_body_scale = 0.0;   // stiffness multiplier of the device body material
  double instability_fraction = 0.37;  // abort when expansion exceeds this fraction of chamber radius
};

/// Constants obtained by `calibrate(default_anchors(), ...)` on the default
/// Geometry A, frozen.
ModelConstants default_constants();

struct SegmentModel {
  int n_segments = 32;
  int quadrature_order = 8;          // Gauss points per sub-interval of the section integral
  double quadrature_step = 0.25;     // mm, maximum sub-interval height
  ModelConstants constants = default_constants();
  std::string silicone = "ecoflex_00_50";
  std::string layer_material = "fiberglass_layer";
  std::string body_material = "ecoflex_00_50";
  bool check_instability = true;
};

void validate(const SegmentModel& seg);

/// Returns `spec` embedded in `device`. The device body adds resisting
/// section; with `payload` the embedded rigid inclusion freezes the part of
/// the chamber it overlaps.
ActuatorSpec compose_device(const ActuatorSpec& spec, const DeviceSpec& device, bool payload);

/// Turns seen by the hoop constraint: doubled for DH.
int effective_turns(const WindingSpec& winding);

double fibre_effectiveness(double n_eff, double n0);

/// Quadrature of one cross-section. Node weights already include strip
/// width and the quadrature weight.
struct SectionModel {
  double neutral_y = 0.0;
  double chamber_area = 0.0;     // mm^2, all chambers
  double drive_arm = 0.0;        // mm, chamber centroid above the neutral plane
  double kappa_max = 0.0;        // 1/mm, bound keeping every fibre stretch positive
  struct Region {
    HyperelasticModel model;
    double scale = 1.0;
    Eigen::VectorXd y;       // offset from the neutral plane
    Eigen::VectorXd weight;  // mm
  };
  std::vector<Region> regions;
};

SectionModel build_section(const ActuatorSpec& spec, const MaterialLibrary& materials, const SegmentModel& seg);

/// N*mm; pressure in kPa.
double drive_moment(const SectionModel& section, double pressure_kpa, double eta);

/// Resisting moment (N*mm) at curvature kappa (1/mm) and its derivative.
double resisting_moment(const SectionModel& section, double kappa, double* derivative = nullptr);

/// Axial stretch of a fibre at offset `y` from the neutral plane.
double bending_stretch(double kappa, double y);

struct PointSolution {
  double pressure = 0.0;       // kPa
  double kappa = 0.0;          // 1/mm, flexible-segment curvature before the 180 deg cap
  double theta = 0.0;          // deg
  double alpha = 0.0;          // deg, 2 * theta
  double expansion = 0.0;      // mm
  double twist_pct = 0.0;
  double residual = 0.0;       // N*mm, |M_resist - M_drive|
  double drive = 0.0;          // N*mm
  int iterations = 0;
  Vec3 tip = Vec3::Zero();
  double lateral_deflection = 0.0;  // mm, out-of-plane tip deflection from twist
};

struct SolveResult {
  std::vector<double> pressures;
  std::vector<double> theta;
  std::vector<double> alpha;
  std::vector<double> radial_expansion;
  std::vector<double> twist_pct;
  Eigen::Matrix3Xd tip_xyz;
  std::vector<double> kappa;
  std::vector<double> residual;
};

/// Raised when the predicted expansion exceeds the instability limit. The
/// solution up to the last stable pressure is attached.
class InstabilityError : public SolveError {
 public:
  InstabilityError(double critical_pressure, double failed_pressure, SolveResult partial);
  double critical_pressure() const { return critical_; }
  double failed_pressure() const { return failed_; }
  const SolveResult& partial() const { return partial_; }

 private:
  double critical_;
  double failed_;
  SolveResult partial_;
};

/// Single pressure, no instability check.
PointSolution solve_point(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                          double pressure_kpa, const SegmentModel& seg);

SolveResult solve_quasi_static(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                               const PressureSchedule& schedule, const SegmentModel& seg);

/// Mean radial expansion in mm.
double radial_expansion_model(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                              double pressure_kpa, const SegmentModel& seg = {});

/// Pressure (kPa) at which the expansion reaches the instability limit.
double critical_pressure(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                         const SegmentModel& seg = {});

/// Tangent of the fibre lead angle with handedness sign; zero when the
/// windings are balanced (DH, or a mirrored chamber pair).
double net_lead(const ActuatorSpec& spec, const WindingSpec& winding);

/// Twist percentage per entry of `result`.
std::vector<double> twist_estimate(const ActuatorSpec& spec, const WindingSpec& winding, const SolveResult& result,
                                   const SegmentModel& seg = {});

/// Straight base, piecewise constant-curvature chamber, straight tip.
/// `kappa` is the curvature of every flexible piece.
Vec3 tip_position(const ActuatorSpec& spec, double kappa);

/// Flexible chamber pieces as [start, end] along the chamber, rigid spans removed.
std::vector<std::pair<double, double>> flexible_pieces(const ActuatorSpec& spec, int n_segments);

/// `pressure_kPa,theta_deg,alpha_deg,expansion_mm,twist_pct,tip_x,tip_y,tip_z`.
std::string solve_csv(const SolveResult& result);

// ---------------------------------------------------------------------------
// Calibration

struct ConfigKey {
  HelixStyle style = HelixStyle::SH;
  int turns = 30;
  bool device = false;
  bool payload = false;
  bool halve_fibre = false;

  std::string label() const;
};

enum class AnchorQuantity { Theta, Expansion, Twist };

struct Anchor {
  ConfigKey config;
  double pressure = 100.0;  // kPa
  double target = 0.0;      // deg, mm or %
  AnchorQuantity quantity = AnchorQuantity::Theta;
};

struct CalibrationResult {
  ModelConstants constants;
  std::vector<double> predicted;
  std::vector<double> residuals;  // predicted - target
  int evaluations = 0;
};

/// Bending 30 SH -> 90 deg, expansion 18 SH -> 2.6 mm at 93 kPa, twist
/// 100 SH -> 2.06 %, device with 30 DH -> 18.1 deg.
std::vector<Anchor> default_anchors();

/// Fits the constants touched by the anchors; the rest keep the values in
/// `seg.constants`. Throws SolveError after 10000 model evaluations.
CalibrationResult calibrate(const std::vector<Anchor>& anchors, const ActuatorSpec& base,
                            const MaterialLibrary& materials, const SegmentModel& seg = {});

/// Quantity an anchor measures, for a given spec and model.
double evaluate_anchor(const Anchor& anchor, const ActuatorSpec& base, const MaterialLibrary& materials,
                       const SegmentModel& seg);

WindingSpec winding_for(const ConfigKey& key);

/// Reference bending results of the nine standard configurations.
struct ReferenceCase {
  ConfigKey config;
  double pressure;  // kPa
  double theta;     // deg
};
std::vector<ReferenceCase> reference_cases();

/// Bending angle at the case pressure, or at the critical pressure if that
/// is lower.
double predict_case(const ReferenceCase& c, const ActuatorSpec& base, const MaterialLibrary& materials,
                    const SegmentModel& seg);

/// Kendall rank correlation with tie correction.
double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Workspace

struct Corridor {
  double radius = 25.0;   // mm
  double length = 80.0;   // mm, from the actuator base
};

struct WorkspaceResult {
  std::vector<double> pressures;
  Eigen::Matrix3Xd tips;
  Vec3 base = Vec3::Zero();
  double max_reach = 0.0;       // mm, largest base-to-tip distance
  double swept_area = 0.0;      // mm^2, region between the base and the tip trajectory
  double path_length = 0.0;     // mm, tip trajectory length
  bool fits = true;
  std::optional<double> failure_pressure;
};

WorkspaceResult workspace(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                          const PressureSchedule& schedule, const SegmentModel& seg = {},
                          const Corridor& corridor = {});

std::string workspace_csv(const WorkspaceResult& ws);

SegmentModel segment_model_from_kv(const KeyValues& kv);

}  // namespace fibrebend
