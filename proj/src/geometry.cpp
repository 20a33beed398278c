#include "fibrebend/geometry.hpp"

#include "fibrebend/errors.hpp"
#include "fibrebend/mechanics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fibrebend {

namespace {

constexpr double kPi = std::numbers::pi;

struct PieceLength {
  double operator()(const LineSegment& l) const { return (l.to - l.from).norm(); }
  double operator()(const ArcSegment& a) const { return a.radius * std::abs(a.sweep); }
};

struct PiecePoint {
  double t;
  Vec2 operator()(const LineSegment& l) const { return l.from + t * (l.to - l.from); }
  Vec2 operator()(const ArcSegment& a) const {
    const double phi = a.start_angle + t * a.sweep;
    return a.centre + a.radius * Vec2(std::cos(phi), std::sin(phi));
  }
};

// Contribution of one piece to 1/2 * closed integral of (x dy - y dx).
struct PieceGreen {
  double operator()(const LineSegment& l) const {
    return 0.5 * (l.from.x() * l.to.y() - l.to.x() * l.from.y());
  }
  double operator()(const ArcSegment& a) const {
    const double p1 = a.start_angle;
    const double p2 = a.start_angle + a.sweep;
    const double r = a.radius;
    return 0.5 * (r * r * a.sweep + r * a.centre.x() * (std::sin(p2) - std::sin(p1)) -
                  r * a.centre.y() * (std::cos(p2) - std::cos(p1)));
  }
};

double wrap_angle_into(double phi, double start, double sweep) {
  // Returns t in [0,1] if phi lies on the arc, otherwise a value outside.
  double rel = (phi - start) / sweep;
  const double period = 2.0 * kPi / std::abs(sweep);
  rel -= std::floor(rel / period) * period;
  return rel;
}

struct PieceDistance {
  Vec2 p;
  double operator()(const LineSegment& l) const {
    const Vec2 d = l.to - l.from;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - l.from).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (l.from + t * d - p).norm();
  }
  double operator()(const ArcSegment& a) const {
    const Vec2 rel = p - a.centre;
    const double ends = std::min((PiecePoint{0.0}(a) - p).norm(), (PiecePoint{1.0}(a) - p).norm());
    if (rel.norm() == 0.0) return a.radius;
    const double t = wrap_angle_into(std::atan2(rel.y(), rel.x()), a.start_angle, a.sweep);
    if (t >= 0.0 && t <= 1.0) return std::abs(rel.norm() - a.radius);
    return ends;
  }
};

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(fmt::format("{} must be > 0 (got {})", name, v));
}

// Chamber of a Geometry A section for a given chord height; exact area is
// enclosed_area(boundary).
ClosedCurve filleted_segment(const Vec2& centre, double radius, double chord_y, double fillet) {
  ClosedCurve out;
  if (fillet <= 0.0) {
    const double h = chord_y - centre.y();
    const double half = std::sqrt(radius * radius - h * h);
    const double beta = std::atan2(h, half);
    out.pieces.emplace_back(LineSegment{Vec2(-half, chord_y), Vec2(half, chord_y)});
    out.pieces.emplace_back(ArcSegment{centre, radius, beta, kPi - 2.0 * beta});
    return out;
  }
  const double fy = chord_y + fillet - centre.y();
  const double reach = radius - fillet;
  const double fx = std::sqrt(reach * reach - fy * fy);
  const double beta = std::atan2(fy, fx);
  const Vec2 right(centre.x() + fx, chord_y + fillet);
  const Vec2 left(centre.x() - fx, chord_y + fillet);
  out.pieces.emplace_back(LineSegment{Vec2(left.x(), chord_y), Vec2(right.x(), chord_y)});
  out.pieces.emplace_back(ArcSegment{right, fillet, -kPi / 2.0, beta + kPi / 2.0});
  out.pieces.emplace_back(ArcSegment{centre, radius, beta, kPi - 2.0 * beta});
  out.pieces.emplace_back(ArcSegment{left, fillet, kPi - beta, beta + kPi / 2.0});
  return out;
}

ClosedCurve outer_section(double outer_radius, double flat_y) {
  const double half = std::sqrt(outer_radius * outer_radius - flat_y * flat_y);
  const double a0 = std::atan2(flat_y, half);
  ClosedCurve out;
  out.pieces.emplace_back(LineSegment{Vec2(-half, flat_y), Vec2(half, flat_y)});
  out.pieces.emplace_back(ArcSegment{Vec2::Zero(), outer_radius, a0, kPi - 2.0 * a0});
  return out;
}

ClosedCurve circle(const Vec2& centre, double radius, double start_angle = -kPi / 2.0) {
  ClosedCurve out;
  out.pieces.emplace_back(ArcSegment{centre, radius, start_angle, 2.0 * kPi});
  return out;
}

}  // namespace

std::string to_string(Chirality c) { return c == Chirality::CW ? "CW" : "CCW"; }

Chirality chirality_from_string(const std::string& s) {
  if (s == "CW" || s == "cw") return Chirality::CW;
  if (s == "CCW" || s == "ccw") return Chirality::CCW;
  throw ValidationError("chirality must be CW or CCW, got '" + s + "'");
}

double piece_length(const CurvePiece& piece) { return std::visit(PieceLength{}, piece); }

Vec2 piece_point(const CurvePiece& piece, double t) { return std::visit(PiecePoint{t}, piece); }

double curve_length(const ClosedCurve& curve) {
  double total = 0.0;
  for (const auto& p : curve.pieces) total += piece_length(p);
  return total;
}

Vec2 point_at_arclength(const ClosedCurve& curve, double s) {
  const double total = curve_length(curve);
  s -= std::floor(s / total) * total;
  for (const auto& p : curve.pieces) {
    const double len = piece_length(p);
    if (s <= len) return piece_point(p, len > 0.0 ? s / len : 0.0);
    s -= len;
  }
  return piece_point(curve.pieces.back(), 1.0);
}

Eigen::Matrix2Xd sample_curve(const ClosedCurve& curve, int samples) {
  if (samples < 3) throw ValidationError("sample_curve needs at least 3 samples");
  const double total = curve_length(curve);
  Eigen::Matrix2Xd out(2, samples);
  std::size_t piece = 0;
  double piece_start = 0.0;
  double len = piece_length(curve.pieces[0]);
  for (int k = 0; k < samples; ++k) {
    const double s = total * k / samples;
    while (s > piece_start + len && piece + 1 < curve.pieces.size()) {
      piece_start += len;
      ++piece;
      len = piece_length(curve.pieces[piece]);
    }
    const double t = len > 0.0 ? std::clamp((s - piece_start) / len, 0.0, 1.0) : 0.0;
    out.col(k) = piece_point(curve.pieces[piece], t);
  }
  return out;
}

double enclosed_area(const ClosedCurve& curve) {
  double a = 0.0;
  for (const auto& p : curve.pieces) a += std::visit(PieceGreen{}, p);
  return a;
}

double polygon_area(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon) {
  const Eigen::Index n = polygon.cols();
  double a = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    a += polygon(0, i) * polygon(1, j) - polygon(0, j) * polygon(1, i);
  }
  return 0.5 * a;
}

bool polygon_self_intersects(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon) {
  const Eigen::Index n = polygon.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 a = polygon.col(i);
    const Vec2 b = polygon.col((i + 1) % n);
    for (Eigen::Index j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, polygon.col(j), polygon.col((j + 1) % n))) return true;
    }
  }
  return false;
}

double strip_width(const Eigen::Ref<const Eigen::Matrix2Xd>& polygon, double y) {
  const Eigen::Index n = polygon.cols();
  std::vector<double> xs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    const double y1 = polygon(1, i);
    const double y2 = polygon(1, j);
    // half-open rule avoids double counting shared vertices
    if ((y1 <= y && y < y2) || (y2 <= y && y < y1)) {
      const double t = (y - y1) / (y2 - y1);
      xs.push_back(polygon(0, i) + t * (polygon(0, j) - polygon(0, i)));
    }
  }
  std::sort(xs.begin(), xs.end());
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) w += xs[k + 1] - xs[k];
  return w;
}

double distance_to_curve(const ClosedCurve& curve, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : curve.pieces) best = std::min(best, std::visit(PieceDistance{p}, piece));
  return best;
}

ClosedCurve mirrored(const ClosedCurve& curve, double x0) {
  auto flip = [x0](const Vec2& v) { return Vec2(2.0 * x0 - v.x(), v.y()); };
  ClosedCurve out;
  for (auto it = curve.pieces.rbegin(); it != curve.pieces.rend(); ++it) {
    if (const auto* l = std::get_if<LineSegment>(&*it)) {
      out.pieces.emplace_back(LineSegment{flip(l->to), flip(l->from)});
    } else {
      const auto& a = std::get<ArcSegment>(*it);
      out.pieces.emplace_back(ArcSegment{flip(a.centre), a.radius, kPi - (a.start_angle + a.sweep), a.sweep});
    }
  }
  return out;
}

std::pair<double, double> y_range(const ClosedCurve& curve) {
  const Eigen::Matrix2Xd poly = sample_curve(curve, 2048);
  double lo = poly.row(1).minCoeff();
  double hi = poly.row(1).maxCoeff();
  for (const auto& piece : curve.pieces) {
    if (const auto* a = std::get_if<ArcSegment>(&piece)) {
      for (double phi : {kPi / 2.0, -kPi / 2.0}) {
        const double t = wrap_angle_into(phi, a->start_angle, a->sweep);
        if (t >= 0.0 && t <= 1.0) {
          lo = std::min(lo, a->centre.y() + a->radius * std::sin(phi));
          hi = std::max(hi, a->centre.y() + a->radius * std::sin(phi));
        }
      }
    }
  }
  return {lo, hi};
}

double ChamberMetrics::min_wall() const {
  if (wall_thickness_profile.empty()) return 0.0;
  return *std::min_element(wall_thickness_profile.begin(), wall_thickness_profile.end());
}

// ---------------------------------------------------------------------------

ActuatorSpec build_geometry_a(const GeometryAParams& p) {
  for (auto [v, name] : {std::pair{p.D_i, "D_i"}, {p.D_O, "D_O"}, {p.delta_f, "delta_f"}, {p.delta_c, "delta_c"},
                         {p.delta_t, "delta_t"}, {p.delta_r, "delta_r"}, {p.delta_a, "delta_a"}, {p.phi_k, "phi_k"},
                         {p.D_rod, "D_rod"}, {p.W, "W"}, {p.L, "L"}, {p.C, "C"}, {p.R, "R"}, {p.T, "T"},
                         {p.chamber_area, "chamber_area"}}) {
    require_positive(v, name);
  }
  if (p.fillet_radius < 0.0) throw ValidationError("fillet_radius must be >= 0");
  if (p.D_i >= p.D_O)
    throw ValidationError(fmt::format("chamber exceeds envelope: D_i = {} >= D_O = {}", p.D_i, p.D_O));

  ActuatorSpec spec;
  spec.kind = GeometryKind::A;
  spec.params = p;

  if (p.delta_c < p.cover_floor || p.delta_t < p.cover_floor)
    throw ValidationError(fmt::format("silicone cover below floor {} mm (delta_c = {}, delta_t = {})", p.cover_floor,
                                      p.delta_c, p.delta_t));
  if (p.delta_c < 0.2) spec.warnings.push_back(fmt::format("delta_c = {} mm is thinner than 0.2 mm", p.delta_c));
  if (p.delta_t < 0.3) spec.warnings.push_back(fmt::format("delta_t = {} mm is thinner than 0.3 mm", p.delta_t));

  const double ro = p.D_O / 2.0;
  if (p.delta_r >= ro) throw ValidationError("delta_r must be smaller than D_O / 2");
  if (std::abs(ro - p.delta_r - p.T) > 1e-9)
    throw ValidationError(fmt::format("T = {} inconsistent with D_O / 2 - delta_r = {}", p.T, ro - p.delta_r));
  if (p.W > p.D_O + 1e-12) throw ValidationError("W cannot exceed D_O");

  spec.outer = outer_section(ro, p.delta_r);
  spec.flat_y = p.delta_r;
  spec.crown_y = ro;
  spec.chamber_length = p.L;
  spec.cap_length = p.C;
  spec.tip_length = p.R;
  spec.fibre_diameter = p.phi_k;
  spec.fibre_cover = p.delta_c;

  // Fibre passes under the fibreglass sheet with delta_c cover on the flat
  // side; the chamber chord sits at least delta_f above the sheet.
  InextensibleLayer layer;
  layer.y_bottom = p.delta_r + p.delta_c + p.phi_k;
  layer.y_top = layer.y_bottom + p.delta_a;
  spec.layer = layer;

  const double rc = p.D_i / 2.0;
  const double crown = ro - p.delta_c - p.phi_k - p.delta_t;
  const Vec2 centre(0.0, crown - rc);

  // The fibre layer follows the chamber arc; it must stay inside the outer
  // arc wherever it runs above the winding chord.
  const double winding_r = rc + p.delta_t + p.phi_k / 2.0;
  const double winding_chord = p.delta_r + p.delta_c + p.phi_k / 2.0;
  if (winding_chord - centre.y() >= winding_r) throw ValidationError("chamber exceeds envelope: arc below flat side");
  {
    const double h = winding_chord - centre.y();
    const double beta = std::asin(h / winding_r);
    for (int k = 0; k <= 256; ++k) {
      const double phi = beta + (kPi - 2.0 * beta) * k / 256.0;
      const Vec2 q = centre + winding_r * Vec2(std::cos(phi), std::sin(phi));
      if (q.norm() + p.phi_k / 2.0 + p.delta_c > ro + 1e-9)
        throw ValidationError(fmt::format("chamber exceeds envelope (D_i = {}, D_O = {})", p.D_i, p.D_O));
    }
  }

  const double chord_min = layer.y_top + p.delta_f;
  const double chord_max = crown - 2.0 * p.fillet_radius;
  if (chord_min >= chord_max) throw ValidationError("no room for the chamber between the flat cover and the crown");
  auto area_at = [&](double chord_y) { return enclosed_area(filleted_segment(centre, rc, chord_y, p.fillet_radius)); };
  if (area_at(chord_min) < p.chamber_area)
    throw ValidationError(fmt::format("chamber area {} mm^2 unattainable (max {:.4f} mm^2 with these covers)",
                                      p.chamber_area, area_at(chord_min)));
  double lo = chord_min;
  double hi = chord_max;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (area_at(mid) > p.chamber_area ? lo : hi) = mid;
  }
  const double chord_y = 0.5 * (lo + hi);

  Chamber chamber;
  chamber.boundary = filleted_segment(centre, rc, chord_y, p.fillet_radius);
  chamber.arc_centre = centre;
  chamber.radius = rc;
  chamber.crown_wall = ro - crown;
  chamber.chirality = Chirality::CW;
  spec.chambers.push_back(std::move(chamber));

  spec.metrics = chamber_metrics(spec);
  return spec;
}

ActuatorSpec build_geometry_b(const GeometryBParams& p) {
  for (auto [v, name] :
       {std::pair{p.chamber_diameter, "chamber_diameter"}, {p.min_wall, "min_wall"}, {p.D_O, "D_O"},
        {p.delta_r, "delta_r"}, {p.delta_t, "delta_t"}, {p.delta_c, "delta_c"}, {p.delta_a, "delta_a"},
        {p.phi_k, "phi_k"}, {p.L, "L"}, {p.C, "C"}, {p.R, "R"}, {p.chamber_centre_y, "chamber_centre_y"}}) {
    require_positive(v, name);
  }
  const double r = p.chamber_diameter / 2.0;
  if (p.chamber_separation <= p.chamber_diameter)
    throw ValidationError(fmt::format("chambers overlap (separation {} <= diameter {})", p.chamber_separation,
                                      p.chamber_diameter));
  const double ro = p.D_O / 2.0;
  if (p.delta_r >= ro) throw ValidationError("delta_r must be smaller than D_O / 2");

  ActuatorSpec spec;
  spec.kind = GeometryKind::B;
  spec.params = p;
  spec.outer = outer_section(ro, p.delta_r);
  spec.flat_y = p.delta_r;
  spec.crown_y = ro;
  spec.chamber_length = p.L;
  spec.cap_length = p.C;
  spec.tip_length = p.R;
  spec.fibre_diameter = p.phi_k;
  spec.fibre_cover = p.delta_c;

  double floor_y = p.delta_r;
  if (p.inextensible_layer) {
    InextensibleLayer layer;
    layer.y_bottom = p.delta_r + p.delta_c;
    layer.y_top = layer.y_bottom + p.delta_a;
    spec.layer = layer;
    floor_y = layer.y_top;
  }

  const double between = p.chamber_separation - p.chamber_diameter;
  const Vec2 c1(-p.chamber_separation / 2.0, p.chamber_centre_y);
  const double to_outer = ro - c1.norm() - r;
  const double to_flat = p.chamber_centre_y - r - floor_y;
  const double wall = std::min({between, to_outer, to_flat});
  if (wall < p.min_wall - 1e-12)
    throw ValidationError(fmt::format("wall {:.4f} mm below floor {} mm (between {:.4f}, outer {:.4f}, flat {:.4f})",
                                      wall, p.min_wall, between, to_outer, to_flat));
  const double fibre_outer = ro - c1.norm() - (r + p.delta_t + p.phi_k);
  if (fibre_outer < p.delta_c)
    spec.warnings.push_back(fmt::format("fibre cover to outer surface {:.4f} mm below delta_c", fibre_outer));

  const std::pair<Vec2, Chirality> placement[2] = {{c1, p.chirality.first},
                                                   {Vec2(-c1.x(), c1.y()), p.chirality.second}};
  for (const auto& [c, chir] : placement) {
    Chamber ch;
    ch.boundary = circle(c, r);
    ch.arc_centre = c;
    ch.radius = r;
    ch.crown_wall = to_outer;
    ch.chirality = chir;
    spec.chambers.push_back(std::move(ch));
  }
  spec.metrics = chamber_metrics(spec);
  return spec;
}

ChamberMetrics chamber_metrics(const ActuatorSpec& spec, int samples) {
  if (samples < 512) throw ValidationError("chamber_metrics needs >= 512 samples");
  if (spec.chambers.empty()) throw ValidationError("spec has no chamber");
  ChamberMetrics m;
  constexpr int kWallSamples = 64;
  for (const auto& ch : spec.chambers) {
    const Eigen::Matrix2Xd poly = sample_curve(ch.boundary, samples);
    if (polygon_self_intersects(sample_curve(ch.boundary, 512)))
      throw ValidationError("degenerate chamber boundary (self-intersecting)");
    const double a = polygon_area(poly);
    if (!(a > 0.0)) throw ValidationError("degenerate chamber boundary (non-positive area)");
    m.cross_section_area += a;
    const Eigen::Matrix2Xd ring = sample_curve(ch.boundary, kWallSamples);
    for (Eigen::Index k = 0; k < ring.cols(); ++k)
      m.wall_thickness_profile.push_back(distance_to_curve(spec.outer, ring.col(k)));
  }
  m.nominal_volume = m.cross_section_area * spec.chamber_length;
  return m;
}

ActuatorSpec mirrored(const ActuatorSpec& spec) {
  ActuatorSpec out = spec;
  out.outer = mirrored(spec.outer);
  out.chambers.clear();
  for (auto it = spec.chambers.rbegin(); it != spec.chambers.rend(); ++it) {
    Chamber ch = *it;
    ch.boundary = mirrored(it->boundary);
    ch.arc_centre.x() = -ch.arc_centre.x();
    ch.chirality = flipped(ch.chirality);
    out.chambers.push_back(std::move(ch));
  }
  if (out.device_body) {
    out.device_body->body = mirrored(spec.device_body->body);
    out.device_body->hole = mirrored(spec.device_body->hole);
  }
  out.metrics = chamber_metrics(out);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const GeometryAParams& p) {
  return {{"D_i", p.D_i},         {"D_O", p.D_O},         {"delta_f", p.delta_f},
          {"delta_c", p.delta_c}, {"delta_t", p.delta_t}, {"delta_r", p.delta_r},
          {"delta_a", p.delta_a}, {"phi_k", p.phi_k},     {"D_rod", p.D_rod},
          {"W", p.W},             {"L", p.L},             {"C", p.C},
          {"R", p.R},             {"T", p.T},             {"chamber_area", p.chamber_area},
          {"fillet_radius", p.fillet_radius},             {"cover_floor", p.cover_floor}};
}

nlohmann::json to_json(const GeometryBParams& p) {
  return {{"chamber_diameter", p.chamber_diameter},
          {"chamber_separation", p.chamber_separation},
          {"chamber_centre_y", p.chamber_centre_y},
          {"min_wall", p.min_wall},
          {"D_O", p.D_O},
          {"delta_r", p.delta_r},
          {"delta_t", p.delta_t},
          {"delta_c", p.delta_c},
          {"delta_a", p.delta_a},
          {"phi_k", p.phi_k},
          {"L", p.L},
          {"C", p.C},
          {"R", p.R},
          {"inextensible_layer", p.inextensible_layer},
          {"chirality", {to_string(p.chirality.first), to_string(p.chirality.second)}}};
}

nlohmann::json to_json(const DeviceSpec& d) {
  nlohmann::json j = {{"body_diameter", d.body_diameter},
                      {"body_length", d.body_length},
                      {"actuator_section_length", d.actuator_section_length},
                      {"flat_side_fill", d.flat_side_fill}};
  if (d.embedded_payload) {
    j["embedded_payload"] = {{"diameter", d.embedded_payload->diameter},
                             {"length", d.embedded_payload->length},
                             {"offset", d.embedded_payload->offset}};
  } else {
    j["embedded_payload"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const ActuatorSpec& spec) {
  nlohmann::json j;
  j["schema_version"] = kSpecSchemaVersion;
  j["kind"] = spec.kind == GeometryKind::A ? "A" : "B";
  j["params"] = std::visit([](const auto& p) { return to_json(p); }, spec.params);
  j["total_length_mm"] = spec.total_length();
  j["chamber_length_mm"] = spec.chamber_length;
  j["flat_y_mm"] = spec.flat_y;
  j["crown_y_mm"] = spec.crown_y;
  if (spec.layer) j["inextensible_layer"] = {{"y_bottom_mm", spec.layer->y_bottom}, {"y_top_mm", spec.layer->y_top}};
  nlohmann::json chambers = nlohmann::json::array();
  for (const auto& ch : spec.chambers) {
    chambers.push_back({{"arc_centre_mm", {ch.arc_centre.x(), ch.arc_centre.y()}},
                        {"radius_mm", ch.radius},
                        {"crown_wall_mm", ch.crown_wall},
                        {"exact_area_mm2", enclosed_area(ch.boundary)},
                        {"chirality", to_string(ch.chirality)}});
  }
  j["chambers"] = chambers;
  j["metrics"] = {{"cross_section_area_mm2", spec.metrics.cross_section_area},
                  {"nominal_volume_mm3", spec.metrics.nominal_volume},
                  {"min_wall_mm", spec.metrics.min_wall()},
                  {"wall_thickness_profile_mm", spec.metrics.wall_thickness_profile}};
  j["warnings"] = spec.warnings;
  if (spec.device) j["device"] = to_json(*spec.device);
  return j;
}

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ActuatorSpec spec_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSpecSchemaVersion)
      throw ValidationError("unsupported spec schema_version");
    const auto& pj = j.at("params");
    ActuatorSpec spec;
    if (j.at("kind").get<std::string>() == "A") {
      GeometryAParams p;
      read_if(pj, "D_i", p.D_i);
      read_if(pj, "D_O", p.D_O);
      read_if(pj, "delta_f", p.delta_f);
      read_if(pj, "delta_c", p.delta_c);
      read_if(pj, "delta_t", p.delta_t);
      read_if(pj, "delta_r", p.delta_r);
      read_if(pj, "delta_a", p.delta_a);
      read_if(pj, "phi_k", p.phi_k);
      read_if(pj, "D_rod", p.D_rod);
      read_if(pj, "W", p.W);
      read_if(pj, "L", p.L);
      read_if(pj, "C", p.C);
      read_if(pj, "R", p.R);
      read_if(pj, "T", p.T);
      read_if(pj, "chamber_area", p.chamber_area);
      read_if(pj, "fillet_radius", p.fillet_radius);
      read_if(pj, "cover_floor", p.cover_floor);
      spec = build_geometry_a(p);
    } else {
      GeometryBParams p;
      read_if(pj, "chamber_diameter", p.chamber_diameter);
      read_if(pj, "chamber_separation", p.chamber_separation);
      read_if(pj, "chamber_centre_y", p.chamber_centre_y);
      read_if(pj, "min_wall", p.min_wall);
      read_if(pj, "D_O", p.D_O);
      read_if(pj, "delta_r", p.delta_r);
      read_if(pj, "delta_t", p.delta_t);
      read_if(pj, "delta_c", p.delta_c);
      read_if(pj, "delta_a", p.delta_a);
      read_if(pj, "phi_k", p.phi_k);
      read_if(pj, "L", p.L);
      read_if(pj, "C", p.C);
      read_if(pj, "R", p.R);
      read_if(pj, "inextensible_layer", p.inextensible_layer);
      if (pj.contains("chirality")) {
        const auto& c = pj.at("chirality");
        p.chirality = {chirality_from_string(c.at(0).get<std::string>()),
                       chirality_from_string(c.at(1).get<std::string>())};
      }
      spec = build_geometry_b(p);
    }
    if (j.contains("device")) {
      const auto& dj = j.at("device");
      DeviceSpec d;
      read_if(dj, "body_diameter", d.body_diameter);
      read_if(dj, "body_length", d.body_length);
      read_if(dj, "actuator_section_length", d.actuator_section_length);
      read_if(dj, "flat_side_fill", d.flat_side_fill);
      if (dj.contains("embedded_payload") && !dj.at("embedded_payload").is_null()) {
        Payload pl;
        const auto& pp = dj.at("embedded_payload");
        read_if(pp, "diameter", pl.diameter);
        read_if(pp, "length", pl.length);
        read_if(pp, "offset", pl.offset);
        d.embedded_payload = pl;
      } else {
        d.embedded_payload.reset();
      }
      spec = compose_device(spec, d, d.embedded_payload.has_value());
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spec json: ") + e.what());
  }
}

GeometryAParams geometry_a_from_kv(const KeyValues& kv) {
  KvReader r(kv, "geometry");
  r.get_string("kind", "A");
  GeometryAParams p;
  p.D_i = r.get_double("D_i", p.D_i);
  p.D_O = r.get_double("D_O", p.D_O);
  p.delta_f = r.get_double("delta_f", p.delta_f);
  p.delta_c = r.get_double("delta_c", p.delta_c);
  p.delta_t = r.get_double("delta_t", p.delta_t);
  p.delta_r = r.get_double("delta_r", p.delta_r);
  p.delta_a = r.get_double("delta_a", p.delta_a);
  p.phi_k = r.get_double("phi_k", p.phi_k);
  p.D_rod = r.get_double("D_rod", p.D_rod);
  p.W = r.get_double("W", p.W);
  p.L = r.get_double("L", p.L);
  p.C = r.get_double("C", p.C);
  p.R = r.get_double("R", p.R);
  p.T = r.get_double("T", p.T);
  p.chamber_area = r.get_double("chamber_area", p.chamber_area);
  p.fillet_radius = r.get_double("fillet_radius", p.fillet_radius);
  p.cover_floor = r.get_double("cover_floor", p.cover_floor);
  r.finish();
  return p;
}

GeometryBParams geometry_b_from_kv(const KeyValues& kv) {
  KvReader r(kv, "geometry");
  r.get_string("kind", "B");
  GeometryBParams p;
  p.chamber_diameter = r.get_double("chamber_diameter", p.chamber_diameter);
  p.chamber_separation = r.get_double("chamber_separation", p.chamber_separation);
  p.chamber_centre_y = r.get_double("chamber_centre_y", p.chamber_centre_y);
  p.min_wall = r.get_double("min_wall", p.min_wall);
  p.D_O = r.get_double("D_O", p.D_O);
  p.delta_r = r.get_double("delta_r", p.delta_r);
  p.delta_t = r.get_double("delta_t", p.delta_t);
  p.delta_c = r.get_double("delta_c", p.delta_c);
  p.delta_a = r.get_double("delta_a", p.delta_a);
  p.phi_k = r.get_double("phi_k", p.phi_k);
  p.L = r.get_double("L", p.L);
  p.C = r.get_double("C", p.C);
  p.R = r.get_double("R", p.R);
  p.inextensible_layer = r.get_bool("inextensible_layer", p.inextensible_layer);
  p.chirality.first = chirality_from_string(r.get_string("chirality_1", to_string(p.chirality.first)));
  p.chirality.second = chirality_from_string(r.get_string("chirality_2", to_string(p.chirality.second)));
  r.finish();
  return p;
}

DeviceSpec device_from_kv(const KeyValues& kv) {
  KvReader r(kv, "device");
  DeviceSpec d;
  d.body_diameter = r.get_double("body_diameter", d.body_diameter);
  d.body_length = r.get_double("body_length", d.body_length);
  d.actuator_section_length = r.get_double("actuator_section_length", d.actuator_section_length);
  d.flat_side_fill = r.get_bool("flat_side_fill", d.flat_side_fill);
  if (r.get_bool("payload", true)) {
    Payload p;
    p.diameter = r.get_double("payload_diameter", p.diameter);
    p.length = r.get_double("payload_length", p.length);
    p.offset = r.get_double("payload_offset", p.offset);
    d.embedded_payload = p;
  } else {
    d.embedded_payload.reset();
  }
  r.finish();
  return d;
}

ActuatorSpec build_from_kv(const KeyValues& kv) {
  const auto it = kv.find("kind");
  const std::string kind = it == kv.end() ? "A" : it->second;
  if (kind == "A") return build_geometry_a(geometry_a_from_kv(kv));
  if (kind == "B") return build_geometry_b(geometry_b_from_kv(kv));
  throw ValidationError("[geometry] kind must be A or B, got '" + kind + "'");
}

std::string cross_section_csv(const ActuatorSpec& spec, int samples) {
  std::string out = "curve,x_mm,y_mm\n";
  auto emit = [&](const std::string& name, const ClosedCurve& c) {
    const Eigen::Matrix2Xd poly = sample_curve(c, samples);
    for (Eigen::Index k = 0; k <= poly.cols(); ++k) {
      const auto col = poly.col(k % poly.cols());
      out += fmt::format("{},{:.9f},{:.9f}\n", name, col.x(), col.y());
    }
  };
  emit("outer", spec.outer);
  for (std::size_t i = 0; i < spec.chambers.size(); ++i) emit(fmt::format("chamber{}", i + 1), spec.chambers[i].boundary);
  if (spec.layer) {
    const double half_lo = strip_width(sample_curve(spec.outer, 4096), spec.layer->y_bottom) / 2.0;
    const double half_hi = strip_width(sample_curve(spec.outer, 4096), spec.layer->y_top) / 2.0;
    out += fmt::format("layer,{:.9f},{:.9f}\n", -half_lo, spec.layer->y_bottom);
    out += fmt::format("layer,{:.9f},{:.9f}\n", half_lo, spec.layer->y_bottom);
    out += fmt::format("layer,{:.9f},{:.9f}\n", half_hi, spec.layer->y_top);
    out += fmt::format("layer,{:.9f},{:.9f}\n", -half_hi, spec.layer->y_top);
    out += fmt::format("layer,{:.9f},{:.9f}\n", -half_lo, spec.layer->y_bottom);
  }
  return out;
}

}  // namespace fibrebend
