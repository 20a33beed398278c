#include "fibrebend/fiberpath.hpp"

#include "fibrebend/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fibrebend {

namespace {

constexpr double kPi = std::numbers::pi;

// A segment of the developed path, shifted into one period [0, P) of the
// contour coordinate.
struct DevelopedPiece {
  Vec2 a;
  Vec2 b;
  Eigen::Index segment;  // index of the originating path segment
};

std::vector<DevelopedPiece> developed_pieces(const FiberPath& path) {
  const double period = path.contour_length;
  std::vector<DevelopedPiece> out;
  for (Eigen::Index i = 0; i + 1 < path.developed.cols(); ++i) {
    Vec2 a = path.developed.col(i);
    Vec2 b = path.developed.col(i + 1);
    // split at every seam s = m * P crossed by the segment
    const double lo = std::min(a.x(), b.x());
    const double hi = std::max(a.x(), b.x());
    std::vector<double> cuts{0.0, 1.0};
    for (double m = std::ceil(lo / period); m * period < hi; m += 1.0) {
      const double s = m * period;
      if (s > lo && s < hi) cuts.push_back((s - a.x()) / (b.x() - a.x()));
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      Vec2 p = a + cuts[k] * (b - a);
      Vec2 q = a + cuts[k + 1] * (b - a);
      const double shift = std::floor(0.5 * (p.x() + q.x()) / period) * period;
      p.x() -= shift;
      q.x() -= shift;
      out.push_back({p, q, i});
    }
  }
  return out;
}

double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

std::optional<Vec2> intersect(const DevelopedPiece& p, const DevelopedPiece& q) {
  const Vec2 r = p.b - p.a;
  const Vec2 s = q.b - q.a;
  const double denom = cross2(r, s);
  const double scale = r.norm() * s.norm();
  if (std::abs(denom) <= 1e-14 * scale) return std::nullopt;  // parallel or collinear: not transversal
  const Vec2 qp = q.a - p.a;
  const double t = cross2(qp, s) / denom;
  const double u = cross2(qp, r) / denom;
  constexpr double eps = 1e-10;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return std::nullopt;
  return p.a + t * r;
}

}  // namespace

std::string to_string(HelixStyle s) { return s == HelixStyle::SH ? "SH" : "DH"; }

HelixStyle helix_style_from_string(const std::string& s) {
  if (s == "SH" || s == "sh") return HelixStyle::SH;
  if (s == "DH" || s == "dh") return HelixStyle::DH;
  throw ValidationError("helix style must be SH or DH, got '" + s + "'");
}

ClosedCurve winding_contour(const ActuatorSpec& spec, std::size_t chamber_index, double radial_offset) {
  if (chamber_index >= spec.chambers.size()) throw ValidationError("winding chamber index out of range");
  if (!(radial_offset > 0.0)) throw ValidationError("radial_offset must be > 0");
  const Chamber& ch = spec.chambers[chamber_index];
  const double r = ch.radius + radial_offset;
  ClosedCurve out;
  if (spec.kind == GeometryKind::B) {
    out.pieces.emplace_back(ArcSegment{ch.arc_centre, r, -kPi / 2.0, 2.0 * kPi});
    return out;
  }
  // Crown arc closed by a straight chord where the winding crosses under
  // the inextensible layer.
  const double chord_y = spec.flat_y + spec.fibre_cover + spec.fibre_diameter / 2.0;
  const double h = chord_y - ch.arc_centre.y();
  if (std::abs(h) >= r) throw ValidationError("winding surface does not reach the flat side");
  const double half = std::sqrt(r * r - h * h);
  const double beta = std::atan2(h, half);
  const Vec2 mid(ch.arc_centre.x(), chord_y);
  const Vec2 right(ch.arc_centre.x() + half, chord_y);
  const Vec2 left(ch.arc_centre.x() - half, chord_y);
  out.pieces.emplace_back(LineSegment{mid, right});
  out.pieces.emplace_back(ArcSegment{ch.arc_centre, r, beta, kPi - 2.0 * beta});
  out.pieces.emplace_back(LineSegment{left, mid});
  return out;
}

FiberPath generate_helix(const ActuatorSpec& spec, const WindingSpec& w) {
  if (w.turns < 1 || w.turns > 1000) throw ValidationError(fmt::format("turns must be in [1, 1000], got {}", w.turns));
  if (w.samples_per_turn < 16) throw ValidationError("samples_per_turn must be >= 16");
  const double span = w.axial_span.value_or(spec.chamber_length);
  if (!(span > 0.0)) throw ValidationError("axial_span must be > 0");

  const ClosedCurve contour = winding_contour(spec, w.chamber_index, w.radial_offset);
  const double perimeter = curve_length(contour);
  const double s0 = w.start_phase * perimeter;
  const double hand = w.chirality == Chirality::CCW ? 1.0 : -1.0;
  const Eigen::Index steps = static_cast<Eigen::Index>(w.turns) * w.samples_per_turn;
  const double z0 = spec.cap_length;

  FiberPath path;
  path.contour_length = perimeter;
  path.axial_span = span;
  path.pitch = span / w.turns;
  path.style = w.style;
  path.turns = w.turns;
  path.chirality = w.chirality;
  path.forward_count = steps + 1;

  const Eigen::Index total = w.style == HelixStyle::SH ? steps + 1 : 2 * steps + 1;
  path.developed.resize(2, total);
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(steps);
    path.developed(0, k) = s0 + hand * perimeter * (static_cast<double>(k) / w.samples_per_turn);
    path.developed(1, k) = span * frac;
  }
  if (w.style == HelixStyle::DH) {
    // Return pass: forward pass reversed and reflected in the developed
    // surface about the generator through the distal joint.
    const double joint = path.developed(0, steps);
    for (Eigen::Index j = 1; j <= steps; ++j) {
      path.developed(0, steps + j) = 2.0 * joint - path.developed(0, steps - j);
      path.developed(1, steps + j) = path.developed(1, steps - j);
    }
  }

  path.points.resize(3, total);
  for (Eigen::Index k = 0; k < total; ++k) {
    const Vec2 xy = point_at_arclength(contour, path.developed(0, k));
    path.points.col(k) = Vec3(xy.x(), xy.y(), z0 + path.developed(1, k));
  }
  double len = 0.0;
  for (Eigen::Index k = 0; k + 1 < total; ++k) len += (path.points.col(k + 1) - path.points.col(k)).norm();
  path.total_length = len;
  return path;
}

FiberPath mirror_path(const FiberPath& path) {
  FiberPath out = path;
  out.points.row(0) = -path.points.row(0);
  // orientation of the developed coordinate reverses under reflection
  out.developed.row(0) = -path.developed.row(0);
  out.chirality = flipped(path.chirality);
  return out;
}

int crossing_count(const FiberPath& path) {
  if (path.style == HelixStyle::SH || path.developed.cols() < 4) return 0;
  const double period = path.contour_length;
  std::vector<DevelopedPiece> pieces = developed_pieces(path);

  // Sweep over z: pieces sorted by their lower z bound, active set pruned
  // by upper bound.
  std::vector<std::size_t> order(pieces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto zlo = [&](std::size_t i) { return std::min(pieces[i].a.y(), pieces[i].b.y()); };
  auto zhi = [&](std::size_t i) { return std::max(pieces[i].a.y(), pieces[i].b.y()); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return zlo(x) < zlo(y); });

  const double tol = 1e-9 * std::max(1.0, period);
  const Eigen::Index last = path.developed.cols() - 1;
  const Vec2 start = path.developed.col(0);
  const Vec2 joint = path.developed.col(path.forward_count - 1);
  auto same_point = [&](const Vec2& p, const Vec2& q) {
    double ds = std::fmod(std::abs(p.x() - q.x()), period);
    ds = std::min(ds, period - ds);
    return ds < tol && std::abs(p.y() - q.y()) < tol;
  };

  std::vector<Vec2> hits;
  std::vector<std::size_t> active;
  for (std::size_t idx : order) {
    const double lo = zlo(idx);
    std::erase_if(active, [&](std::size_t a) { return zhi(a) < lo - tol; });
    for (std::size_t a : active) {
      const auto& p = pieces[a];
      const auto& q = pieces[idx];
      if (std::abs(p.segment - q.segment) <= 1) continue;  // same or adjacent segments share vertices
      if (auto hit = intersect(p, q)) {
        if (same_point(*hit, start) || same_point(*hit, joint)) continue;
        if (same_point(*hit, path.developed.col(last))) continue;
        hits.push_back(*hit);
      }
    }
    active.push_back(idx);
  }

  // Distinct points; vertex crossings are reported by several segment pairs.
  for (auto& h : hits) {
    h.x() -= std::floor(h.x() / period) * period;
    if (h.x() > period - tol) h.x() = 0.0;
  }
  std::sort(hits.begin(), hits.end(), [](const Vec2& p, const Vec2& q) {
    return p.y() < q.y() || (p.y() == q.y() && p.x() < q.x());
  });
  std::vector<Vec2> distinct;
  for (const auto& h : hits) {
    bool seen = false;
    for (auto it = distinct.rbegin(); it != distinct.rend() && h.y() - it->y() < tol; ++it) {
      if (same_point(h, *it)) {
        seen = true;
        break;
      }
    }
    if (!seen) distinct.push_back(h);
  }
  return static_cast<int>(distinct.size());
}

PathMetrics path_metrics(const FiberPath& path) {
  PathMetrics m;
  for (Eigen::Index k = 0; k + 1 < path.points.cols(); ++k)
    m.total_length += (path.points.col(k + 1) - path.points.col(k)).norm();
  m.pitch = path.pitch;
  m.turn_density = path.axial_span > 0.0 ? path.turns / path.axial_span : 0.0;
  return m;
}

std::string fiber_csv(const FiberPath& path) {
  std::string out;
  out += fmt::format("# style={} turns={} chirality={}\n", to_string(path.style), path.turns, to_string(path.chirality));
  out += fmt::format("# pitch_mm={:.12g} axial_span_mm={:.12g} total_length_mm={:.12g} points={}\n", path.pitch,
                     path.axial_span, path.total_length, path.points.cols());
  out += "x_mm,y_mm,z_mm\n";
  for (Eigen::Index k = 0; k < path.points.cols(); ++k)
    out += fmt::format("{:.9f},{:.9f},{:.9f}\n", path.points(0, k), path.points(1, k), path.points(2, k));
  return out;
}

WindingSpec winding_from_kv(const KeyValues& kv) {
  KvReader r(kv, "winding");
  WindingSpec w;
  w.style = helix_style_from_string(r.get_string("style", to_string(w.style)));
  w.turns = r.get_int("turns", w.turns);
  w.chirality = chirality_from_string(r.get_string("chirality", to_string(w.chirality)));
  w.radial_offset = r.get_double("radial_offset", w.radial_offset);
  if (r.has("axial_span")) w.axial_span = r.get_double("axial_span", 0.0);
  w.samples_per_turn = r.get_int("samples_per_turn", w.samples_per_turn);
  w.chamber_index = static_cast<std::size_t>(r.get_int("chamber_index", 0));
  w.start_phase = r.get_double("start_phase", w.start_phase);
  r.finish();
  return w;
}

}  // namespace fibrebend
