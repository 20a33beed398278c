#pragma once

// Helix fibre windings on the chamber-offset winding surface.

#include "fibrebend/geometry.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>

namespace fibrebend {

enum class HelixStyle { SH, DH };

std::string to_string(HelixStyle s);
HelixStyle helix_style_from_string(const std::string& s);

struct WindingSpec {
  HelixStyle style = HelixStyle::SH;
  int turns = 100;
  Chirality chirality = Chirality::CW;
  double radial_offset = 0.403;         // fibre centreline from chamber wall, delta_t + phi_k / 2
  std::optional<double> axial_span;     // defaults to the chamber length
  int samples_per_turn = 36;
  std::size_t chamber_index = 0;
  double start_phase = 0.0;             // fraction of the contour, 0 = flat-side midline
};

/// Ordered fibre centreline. For DH the forward pass (base to tip) is
/// followed by the return pass (tip to base) as one continuous polyline.
struct FiberPath {
  Eigen::Matrix3Xd points;
  /// Developed-surface coordinates per point: (unwrapped contour arc length, axial z).
  Eigen::Matrix2Xd developed;
  double contour_length = 0.0;
  double pitch = 0.0;
  double axial_span = 0.0;
  double total_length = 0.0;
  HelixStyle style = HelixStyle::SH;
  int turns = 0;
  Chirality chirality = Chirality::CW;
  Eigen::Index forward_count = 0;  // points in the forward pass
};

struct PathMetrics {
  double pitch = 0.0;
  double total_length = 0.0;
  double turn_density = 0.0;  // turns per mm of axial span
};

/// Closed cross-section contour the fibre centreline lies on for the given
/// chamber, offset outward from the chamber wall by `radial_offset`.
/// Starts at the flat-side midline and runs counter-clockwise.
ClosedCurve winding_contour(const ActuatorSpec& spec, std::size_t chamber_index, double radial_offset);

FiberPath generate_helix(const ActuatorSpec& spec, const WindingSpec& winding);

/// Reflection across the actuator's sagittal plane x = 0.
FiberPath mirror_path(const FiberPath& path);

/// Transversal self-crossings of the path on the developed winding surface.
int crossing_count(const FiberPath& path);

PathMetrics path_metrics(const FiberPath& path);

/// `x_mm,y_mm,z_mm` rows preceded by `#` metadata comments.
std::string fiber_csv(const FiberPath& path);

WindingSpec winding_from_kv(const KeyValues& kv);

}  // namespace fibrebend
