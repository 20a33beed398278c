#pragma once

// Parametric actuator cross-sections.
//
// Frame convention used throughout the library: x is lateral (width),
// y is through-thickness with the flat side at y = delta_r and the curved
// crown at y = D_O / 2, z is axial with z = 0 on the fixed cap base. The
// datum origin is the centre of the outer arc. All lengths are mm.

#include <Eigen/Core>

#include <nlohmann/json.hpp>

#include "fibrebend/config.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fibrebend {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class Chirality { CW, CCW };

std::string to_string(Chirality c);
Chirality chirality_from_string(const std::string& s);
inline Chirality flipped(Chirality c) { return c == Chirality::CW ? Chirality::CCW : Chirality::CW; }

// ---------------------------------------------------------------------------
// Piecewise boundary curves

struct LineSegment {
  Vec2 from;
  Vec2 to;
};

/// Circular arc; `sweep` is signed (positive = counter-clockwise).
struct ArcSegment {
  Vec2 centre;
  double radius = 0.0;
  double start_angle = 0.0;
  double sweep = 0.0;
};

using CurvePiece = std::variant<LineSegment, ArcSegment>;

/// Closed curve made of line and arc pieces joined end to end,
/// counter-clockwise for a positively oriented region.
struct ClosedCurve {
  std::vector<CurvePiece> pieces;
};

double piece_length(const CurvePiece& piece);
Vec2 piece_point(const CurvePiece& piece, double t);

double curve_length(const ClosedCurve& curve);

/// Point at arc length `s` measured from the start of the first piece;
/// `s` is wrapped into [0, length).
Vec2 point_at_arclength(const ClosedCurve& curve, double s);

/// Arc-length-uniform polygon with `samples` vertices (closing edge implied).
Eigen::Matrix2Xd sample_curve(const ClosedCurve& curve, int samples);

/// Exact enclosed area via Green's theorem on the analytic pieces.
double enclosed_area(const ClosedCurve& curve);

/// Signed shoelace area of an implicitly closed polygon.
double polygon_area(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon);

/// True if any two non-adjacent polygon edges intersect.
bool polygon_self_intersects(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon);

/// Total length of the horizontal line y = const lying inside the polygon.
double strip_width(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon, double y);

/// Exact Euclidean distance from `p` to the curve.
double distance_to_curve(const ClosedCurve& curve, const Vec2& p);

/// Reflection across the plane x = x0; orientation is preserved.
ClosedCurve mirrored(const ClosedCurve& curve, double x0 = 0.0);

std::pair<double, double> y_range(const ClosedCurve& curve);

// ---------------------------------------------------------------------------
// Parameters

/// Single semi-cylindrical chamber. Defaults are the reference design.
struct GeometryAParams {
  double D_i = 14.0;       // internal chamber diameter (arc radius D_i / 2)
  double D_O = 18.0;       // outer diameter
  double delta_f = 1.6;    // minimum silicone cover at the flat interface
  double delta_c = 0.2;    // minimum silicone cover at the curved side
  double delta_t = 0.3;    // thickness between fibre and chamber
  double delta_r = 2.0;    // flat surface to datum origin
  double delta_a = 0.2;    // fibreglass fabric thickness
  double phi_k = 0.206;    // fibre diameter
  double D_rod = 5.0;      // winding rod diameter
  double W = 18.0;         // maximum width
  double L = 26.5;         // chamber length
  double C = 4.0;          // cap length (fixed base)
  double R = 7.0;          // spherical cap segment (tip)
  double T = 7.0;          // total thickness

  double chamber_area = 20.8;   // cross-section area the chord height is solved for
  double fillet_radius = 0.5;   // chord/arc corner fillets
  double cover_floor = 0.1;     // covers below this are an error, not a warning

  double total_length() const { return L + R + C; }
};

/// Twin cylindrical chambers inside the same outer envelope.
struct GeometryBParams {
  double chamber_diameter = 4.0;
  double chamber_separation = 6.0;   // centre-to-centre
  double chamber_centre_y = 5.0;     // height of both chamber centres
  double min_wall = 0.5;
  double D_O = 18.0;
  double delta_r = 2.0;
  double delta_t = 0.3;
  double delta_c = 0.2;
  double delta_a = 0.2;
  double phi_k = 0.206;
  double L = 26.5;
  double C = 4.0;
  double R = 7.0;
  bool inextensible_layer = false;
  std::pair<Chirality, Chirality> chirality{Chirality::CW, Chirality::CCW};

  double total_length() const { return L + R + C; }
};

/// Rigid cylindrical inclusion embedded in a device body. `offset` is the
/// axial position of its near end measured from the device base.
struct Payload {
  double diameter = 7.0;
  double length = 12.0;
  double offset = 48.5;
};

/// Larger cylindrical body the actuator is embedded in. The actuator
/// occupies the distal `actuator_section_length` of the body.
struct DeviceSpec {
  double body_diameter = 18.0;
  double body_length = 60.5;
  double actuator_section_length = 37.5;
  bool flat_side_fill = true;   // body material fills the region below the flat face
  std::optional<Payload> embedded_payload = Payload{};
};

// ---------------------------------------------------------------------------
// Built specs

enum class GeometryKind { A, B };

struct ChamberMetrics {
  double cross_section_area = 0.0;
  double nominal_volume = 0.0;
  std::vector<double> wall_thickness_profile;  // min cover sampled around each chamber perimeter

  double min_wall() const;
};

struct Chamber {
  ClosedCurve boundary;
  Vec2 arc_centre;          // centre of the chamber's main arc
  double radius = 0.0;      // main arc radius
  double crown_wall = 0.0;  // silicone between chamber and outer surface at the crown
  Chirality chirality = Chirality::CW;
};

struct InextensibleLayer {
  double y_bottom = 0.0;
  double y_top = 0.0;
  double mid() const { return 0.5 * (y_bottom + y_top); }
};

/// Extra resisting material added around the actuator (device body).
/// Its strip width is the body disc minus `hole`.
struct BodyRegion {
  ClosedCurve body;
  ClosedCurve hole;
};

struct ActuatorSpec {
  GeometryKind kind = GeometryKind::A;
  std::variant<GeometryAParams, GeometryBParams> params;
  ClosedCurve outer;
  std::vector<Chamber> chambers;
  std::optional<InextensibleLayer> layer;
  ChamberMetrics metrics;
  std::vector<std::string> warnings;

  double flat_y = 0.0;
  double crown_y = 0.0;
  double chamber_length = 0.0;
  double cap_length = 0.0;   // straight rigid base
  double tip_length = 0.0;   // rigid spherical tip segment
  double fibre_diameter = 0.0;
  double fibre_cover = 0.0;  // silicone over the fibre on the outside

  // Set by compose_device.
  std::optional<DeviceSpec> device;
  std::optional<BodyRegion> device_body;
  std::vector<std::pair<double, double>> rigid_spans;  // along the chamber, [0, L]

  double total_length() const { return cap_length + chamber_length + tip_length; }
};

ActuatorSpec build_geometry_a(const GeometryAParams& params);
ActuatorSpec build_geometry_b(const GeometryBParams& params);

/// Polygonal quadrature of every chamber boundary (>= 512 samples each).
ChamberMetrics chamber_metrics(const ActuatorSpec& spec, int samples = 1024);

/// Spec reflected across the sagittal plane x = 0 (chamber order and
/// chirality swap accordingly).
ActuatorSpec mirrored(const ActuatorSpec& spec);

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int kSpecSchemaVersion = 1;

nlohmann::json to_json(const GeometryAParams& p);
nlohmann::json to_json(const GeometryBParams& p);
nlohmann::json to_json(const DeviceSpec& d);
nlohmann::json to_json(const ActuatorSpec& spec);

/// Rebuilds a spec from its serialized parameters (device included).
ActuatorSpec spec_from_json(const nlohmann::json& j);

GeometryAParams geometry_a_from_kv(const KeyValues& kv);
GeometryBParams geometry_b_from_kv(const KeyValues& kv);
DeviceSpec device_from_kv(const KeyValues& kv);

/// Builds A or B depending on `kind` (default A).
ActuatorSpec build_from_kv(const KeyValues& kv);

/// Cross-section boundaries as rows `curve,x_mm,y_mm`.
std::string cross_section_csv(const ActuatorSpec& spec, int samples = 256);

}  // namespace fibrebend
