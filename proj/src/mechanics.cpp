#include "fibrebend/mechanics.hpp"

#include "fibrebend/errors.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace fibrebend {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;
constexpr int kWidthSamples = 4096;
constexpr int kMaxRootIterations = 200;
constexpr int kMaxCalibrationEvaluations = 10000;

// Gauss-Legendre rule on [-1, 1] via the Golub-Welsch eigenproblem.
struct GaussRule {
  Eigen::VectorXd x;
  Eigen::VectorXd w;
};

GaussRule gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule r;
  r.x = es.eigenvalues();
  r.w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

// Quadrature nodes over [lo, hi] split at `breaks`, each sub-interval no
// taller than `step`.
void add_nodes(std::vector<double>& y, std::vector<double>& w, std::vector<double> breaks, double lo, double hi,
               const GaussRule& rule, double step) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::erase_if(breaks, [&](double b) { return b < lo || b > hi; });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               breaks.end());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / step - 1e-9)));
    const double h = (b - a) / m;
    for (int j = 0; j < m; ++j) {
      const double c = a + (j + 0.5) * h;
      for (Eigen::Index q = 0; q < rule.x.size(); ++q) {
        y.push_back(c + 0.5 * h * rule.x(q));
        w.push_back(0.5 * h * rule.w(q));
      }
    }
  }
}

Vec2 polygon_centroid(const Eigen::Matrix2Xd& poly) {
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  const Eigen::Index n = poly.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 p = poly.col(i);
    const Vec2 q = poly.col((i + 1) % n);
    const double cr = p.x() * q.y() - q.x() * p.y();
    a += cr;
    c += (p + q) * cr;
  }
  return c / (3.0 * a);
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double neutral_plane(const ActuatorSpec& spec) {
  if (!spec.layer)
    throw ValidationError("bending model needs an inextensible layer (Geometry B: set inextensible_layer = true)");
  return spec.layer->mid();
}

struct RootResult {
  double kappa = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Safeguarded Newton on M_resist(kappa) = drive over [0, kappa_max).
RootResult solve_curvature(const SectionModel& s, double drive, double pressure) {
  RootResult r;
  if (drive == 0.0) return r;
  const double tol = 1e-10 * std::abs(drive);
  double lo = 0.0;
  double hi = s.kappa_max * (1.0 - 1e-9);
  if (resisting_moment(s, hi) - drive < 0.0)
    throw SolveError(fmt::format("curvature bracket failure at {:.4g} kPa", pressure));
  double d0 = 0.0;
  resisting_moment(s, 0.0, &d0);
  double k = d0 > 0.0 ? std::clamp(drive / d0, lo, hi) : 0.5 * (lo + hi);
  for (int it = 1; it <= kMaxRootIterations; ++it) {
    double dm = 0.0;
    const double f = resisting_moment(s, k, &dm) - drive;
    r.iterations = it;
    if (std::abs(f) < tol) {
      r.kappa = k;
      r.residual = std::abs(f);
      return r;
    }
    (f < 0.0 ? lo : hi) = k;
    double next = dm > 0.0 ? k - f / dm : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      r.kappa = next;
      r.residual = std::abs(resisting_moment(s, next) - drive);
      if (r.residual < tol) return r;
      break;
    }
    k = next;
  }
  throw SolveError(fmt::format("moment balance did not converge at {:.4g} kPa", pressure));
}

double chamber_radius(const ActuatorSpec& spec) {
  double r = 0.0;
  for (const auto& ch : spec.chambers) r += ch.radius;
  return r / static_cast<double>(spec.chambers.size());
}

double lateral_lever(const ActuatorSpec& spec) {
  // integral over flexible pieces of (distance to the tip) ds
  const double end = spec.chamber_length + spec.tip_length;
  double sum = 0.0;
  for (const auto& [a, b] : flexible_pieces(spec, 1)) sum += (end - 0.5 * (a + b)) * (b - a);
  return sum;
}

double flexible_length(const ActuatorSpec& spec) {
  double sum = 0.0;
  for (const auto& [a, b] : flexible_pieces(spec, 1)) sum += b - a;
  return sum;
}

PointSolution solve_with_section(const ActuatorSpec& spec, const WindingSpec& winding,
                                 const MaterialLibrary& materials, const SectionModel& section, double p,
                                 const SegmentModel& seg, double flex_len, double lever, double lead,
                                 const Vec3& tip0) {
  if (!(p >= 0.0)) throw ValidationError("pressure must be >= 0");
  PointSolution out;
  out.pressure = p;
  const double eta = fibre_effectiveness(effective_turns(winding), seg.constants.n0);
  out.drive = drive_moment(section, p, eta);
  const RootResult root = solve_curvature(section, out.drive, p);
  out.kappa = root.kappa;
  out.residual = root.residual;
  out.iterations = root.iterations;

  const double alpha_raw = root.kappa * flex_len;
  out.theta = std::min(0.5 * alpha_raw * kDeg, 180.0);
  out.alpha = 2.0 * out.theta;
  const double k_pose = alpha_raw > 2.0 * kPi ? root.kappa * (2.0 * kPi / alpha_raw) : root.kappa;
  out.tip = tip_position(spec, k_pose);
  out.expansion = radial_expansion_model(spec, winding, materials, p, seg);
  out.lateral_deflection = lead * k_pose * lever;
  const double disp = (out.tip - tip0).norm();
  out.twist_pct = disp > 0.0 ? seg.constants.k_twist * std::abs(out.lateral_deflection) / disp * 100.0 : 0.0;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ModelConstants default_constants() {
  ModelConstants c;
  c.n0 = 39.860702134216446;
  c.k_twist = 0.58125372866599978;
  c.expansion_scale = 516.71609248007962;
  c.device_body_scale = 0.19314649005138249;
  c.instability_fraction = 0.37;
  return c;
}

void validate(const SegmentModel& seg) {
  if (seg.n_segments < 4) throw ValidationError("n_segments must be >= 4");
  if (seg.quadrature_order < 2 || seg.quadrature_order > 64) throw ValidationError("quadrature_order must be in [2, 64]");
  if (!(seg.quadrature_step > 0.0)) throw ValidationError("quadrature_step must be > 0");
  const ModelConstants& c = seg.constants;
  if (!(c.n0 > 0.0)) throw ValidationError("n0 must be > 0");
  if (!(c.k_twist >= 0.0)) throw ValidationError("k_twist must be >= 0");
  if (!(c.expansion_scale > 0.0)) throw ValidationError("expansion_scale must be > 0");
  if (!(c.device_body_scale > 0.0)) throw ValidationError("device_body_scale must be > 0");
  if (!(c.instability_fraction > 0.0)) throw ValidationError("instability_fraction must be > 0");
}

ActuatorSpec compose_device(const ActuatorSpec& spec, const DeviceSpec& device, bool payload) {
  if (spec.device) throw ValidationError("spec is already embedded in a device");
  const double outer_d = 2.0 * spec.crown_y;
  if (device.body_diameter < outer_d - 1e-12)
    throw ValidationError(
        fmt::format("actuator does not fit: body diameter {} < actuator diameter {}", device.body_diameter, outer_d));
  if (device.actuator_section_length > device.body_length + 1e-12)
    throw ValidationError("actuator section longer than the device body");
  if (std::abs(device.actuator_section_length - spec.total_length()) > 1e-9)
    throw ValidationError(fmt::format("actuator does not fit: section length {} != actuator length {}",
                                      device.actuator_section_length, spec.total_length()));

  ActuatorSpec out = spec;
  DeviceSpec d = device;
  if (!payload) d.embedded_payload.reset();
  if (payload && !d.embedded_payload) throw ValidationError("payload requested but the device has none");

  BodyRegion region;
  ArcSegment body{Vec2::Zero(), device.body_diameter / 2.0, -kPi / 2.0, 2.0 * kPi};
  region.body.pieces.emplace_back(body);
  if (device.flat_side_fill) {
    region.hole = spec.outer;
  } else {
    region.hole.pieces.emplace_back(ArcSegment{Vec2::Zero(), spec.crown_y, -kPi / 2.0, 2.0 * kPi});
  }
  out.device_body = region;

  if (d.embedded_payload) {
    const Payload& pl = *d.embedded_payload;
    if (!(pl.diameter > 0.0 && pl.length > 0.0 && pl.offset >= 0.0)) throw ValidationError("invalid payload");
    if (pl.diameter >= device.body_diameter) throw ValidationError("payload wider than the device body");
    if (pl.offset + pl.length > device.body_length + 1e-12) throw ValidationError("payload extends past the device");
    const double chamber_start = device.body_length - device.actuator_section_length + spec.cap_length;
    const double a = std::max(0.0, pl.offset - chamber_start);
    const double b = std::min(spec.chamber_length, pl.offset + pl.length - chamber_start);
    if (b > a) out.rigid_spans.emplace_back(a, b);
  }
  out.device = d;
  return out;
}

int effective_turns(const WindingSpec& winding) {
  return winding.style == HelixStyle::DH ? 2 * winding.turns : winding.turns;
}

double fibre_effectiveness(double n_eff, double n0) {
  if (!(n0 > 0.0)) throw ValidationError("n0 must be > 0");
  return -std::expm1(-n_eff / n0);
}

SectionModel build_section(const ActuatorSpec& spec, const MaterialLibrary& materials, const SegmentModel& seg) {
  validate(seg);
  SectionModel s;
  s.neutral_y = neutral_plane(spec);
  const InextensibleLayer& layer = *spec.layer;

  const Eigen::Matrix2Xd outer = sample_curve(spec.outer, kWidthSamples);
  std::vector<Eigen::Matrix2Xd> chambers;
  std::vector<double> breaks{layer.y_bottom, layer.y_top};
  double area = 0.0;
  double moment_y = 0.0;
  for (const auto& ch : spec.chambers) {
    chambers.push_back(sample_curve(ch.boundary, kWidthSamples));
    const double a = enclosed_area(ch.boundary);
    area += a;
    moment_y += a * polygon_centroid(chambers.back()).y();
    const auto [y0, y1] = y_range(ch.boundary);
    breaks.push_back(y0);
    breaks.push_back(y1);
  }
  s.chamber_area = area;
  s.drive_arm = moment_y / area - s.neutral_y;
  if (!(s.drive_arm > 0.0)) throw ValidationError("chamber centroid must lie above the inextensible layer");

  const GaussRule rule = gauss_legendre(seg.quadrature_order);
  std::vector<double> ys;
  std::vector<double> ws;
  add_nodes(ys, ws, breaks, spec.flat_y, spec.crown_y, rule, seg.quadrature_step);

  SectionModel::Region sil{materials.at(seg.silicone).model, 1.0, {}, {}};
  SectionModel::Region lay{materials.at(seg.layer_material).model, 1.0, {}, {}};
  std::vector<double> sy, sw, ly, lw;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    const double outer_w = strip_width(outer, y);
    if (y > layer.y_bottom && y < layer.y_top) {
      ly.push_back(y - s.neutral_y);
      lw.push_back(ws[i] * outer_w);
      continue;
    }
    double w = outer_w;
    for (const auto& c : chambers) w -= strip_width(c, y);
    if (w > 0.0) {
      sy.push_back(y - s.neutral_y);
      sw.push_back(ws[i] * w);
    }
  }
  sil.y = Eigen::Map<Eigen::VectorXd>(sy.data(), static_cast<Eigen::Index>(sy.size()));
  sil.weight = Eigen::Map<Eigen::VectorXd>(sw.data(), static_cast<Eigen::Index>(sw.size()));
  lay.y = Eigen::Map<Eigen::VectorXd>(ly.data(), static_cast<Eigen::Index>(ly.size()));
  lay.weight = Eigen::Map<Eigen::VectorXd>(lw.data(), static_cast<Eigen::Index>(lw.size()));
  s.regions.push_back(std::move(sil));
  if (lay.y.size() > 0) s.regions.push_back(std::move(lay));

  if (spec.device_body) {
    const Eigen::Matrix2Xd body = sample_curve(spec.device_body->body, kWidthSamples);
    const Eigen::Matrix2Xd hole = sample_curve(spec.device_body->hole, kWidthSamples);
    const auto [b0, b1] = y_range(spec.device_body->body);
    const auto [h0, h1] = y_range(spec.device_body->hole);
    std::vector<double> by, bw;
    add_nodes(by, bw, {h0, h1, spec.flat_y}, b0, b1, rule, seg.quadrature_step);
    std::vector<double> ry, rw;
    for (std::size_t i = 0; i < by.size(); ++i) {
      const double w = strip_width(body, by[i]) - strip_width(hole, by[i]);
      if (w > 0.0) {
        ry.push_back(by[i] - s.neutral_y);
        rw.push_back(bw[i] * w);
      }
    }
    if (!ry.empty()) {
      SectionModel::Region reg{materials.at(seg.body_material).model, seg.constants.device_body_scale, {}, {}};
      reg.y = Eigen::Map<Eigen::VectorXd>(ry.data(), static_cast<Eigen::Index>(ry.size()));
      reg.weight = Eigen::Map<Eigen::VectorXd>(rw.data(), static_cast<Eigen::Index>(rw.size()));
      s.regions.push_back(std::move(reg));
    }
  }

  double y_min = 0.0;
  for (const auto& r : s.regions)
    if (r.y.size() > 0) y_min = std::min(y_min, r.y.minCoeff());
  s.kappa_max = y_min < 0.0 ? 1.0 / (1.5 * -y_min) : 10.0;
  return s;
}

double drive_moment(const SectionModel& section, double pressure_kpa, double eta) {
  return pressure_kpa * 1e-3 * section.chamber_area * section.drive_arm * eta;
}

// Fibres keep their volume while the section bends about the layer:
// stretch (1 + 1.5 kappa y)^(2/3), lever arm (stretch - 1) / kappa.
double bending_stretch(double kappa, double y) { return std::exp((2.0 / 3.0) * std::log1p(1.5 * kappa * y)); }

double resisting_moment(const SectionModel& section, double kappa, double* derivative) {
  double m = 0.0;
  double dm = 0.0;
  for (const auto& r : section.regions) {
    for (Eigen::Index i = 0; i < r.y.size(); ++i) {
      const double y = r.y(i);
      if (kappa == 0.0) {
        dm += r.scale * r.weight(i) * small_strain_modulus(r.model) * y * y;
        continue;
      }
      const double l1 = std::log1p(1.5 * kappa * y);
      const double stretch_m1 = std::expm1((2.0 / 3.0) * l1);
      const double lam = 1.0 + stretch_m1;
      const double arm = stretch_m1 / kappa;
      const double P = nominal_stress(r.model, lam);
      m += r.scale * r.weight(i) * P * arm;
      if (derivative) {
        const double dlam = y * std::exp(-l1 / 3.0);
        const double darm = (dlam - arm) / kappa;
        dm += r.scale * r.weight(i) * (nominal_tangent(r.model, lam) * dlam * arm + P * darm);
      }
    }
  }
  if (derivative) *derivative = dm;
  return m;
}

std::vector<std::pair<double, double>> flexible_pieces(const ActuatorSpec& spec, int n_segments) {
  if (n_segments < 1) throw ValidationError("n_segments must be >= 1");
  std::vector<std::pair<double, double>> rigid = spec.rigid_spans;
  std::sort(rigid.begin(), rigid.end());
  std::vector<std::pair<double, double>> out;
  const double L = spec.chamber_length;
  for (int i = 0; i < n_segments; ++i) {
    double a = L * i / n_segments;
    const double b = L * (i + 1) / n_segments;
    for (const auto& [r0, r1] : rigid) {
      if (r1 <= a || r0 >= b) continue;
      if (r0 > a) out.emplace_back(a, r0);
      a = std::max(a, r1);
    }
    if (b > a) out.emplace_back(a, b);
  }
  return out;
}

Vec3 tip_position(const ActuatorSpec& spec, double kappa) {
  const double base_y = spec.layer ? spec.layer->mid() : spec.flat_y;
  Vec3 pos(0.0, base_y, spec.cap_length);
  double phi = 0.0;
  auto advance = [&](double len, double k) {
    const double turn = k * len;
    const double chord = len * sinc(0.5 * turn);
    const double dir = phi + 0.5 * turn;
    pos.z() += chord * std::cos(dir);
    pos.y() -= chord * std::sin(dir);
    phi += turn;
  };
  double s = 0.0;
  for (const auto& [a, b] : flexible_pieces(spec, 1)) {
    if (a > s) advance(a - s, 0.0);
    advance(b - a, kappa);
    s = b;
  }
  if (spec.chamber_length > s) advance(spec.chamber_length - s, 0.0);
  advance(spec.tip_length, 0.0);
  return pos;
}

double radial_expansion_model(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                              double pressure_kpa, const SegmentModel& seg) {
  if (!(pressure_kpa >= 0.0)) throw ValidationError("pressure must be >= 0");
  const double span = winding.axial_span.value_or(spec.chamber_length);
  const double density = winding.turns / span;
  const double chi = winding.style == HelixStyle::DH ? 2.0 : 1.0;
  const double e_sil = small_strain_modulus(materials.at(seg.silicone).model);
  const double ea = materials.fibre_axial_stiffness();
  double sum = 0.0;
  for (const auto& ch : spec.chambers) {
    const double denom = ch.crown_wall * e_sil + ea * density * chi;
    sum += seg.constants.expansion_scale * pressure_kpa * 1e-3 * ch.radius * ch.radius / denom;
  }
  return sum / static_cast<double>(spec.chambers.size());
}

double critical_pressure(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                         const SegmentModel& seg) {
  // expansion is linear in pressure
  const double per_kpa = radial_expansion_model(spec, winding, materials, 1.0, seg);
  return seg.constants.instability_fraction * chamber_radius(spec) / per_kpa;
}

double net_lead(const ActuatorSpec& spec, const WindingSpec& winding) {
  if (winding.style == HelixStyle::DH) return 0.0;
  const double span = winding.axial_span.value_or(spec.chamber_length);
  const double pitch = span / winding.turns;
  double sum = 0.0;
  if (spec.kind == GeometryKind::B) {
    for (std::size_t i = 0; i < spec.chambers.size(); ++i) {
      const double perimeter = curve_length(winding_contour(spec, i, winding.radial_offset));
      sum += (spec.chambers[i].chirality == Chirality::CCW ? 1.0 : -1.0) * pitch / perimeter;
    }
    return sum / static_cast<double>(spec.chambers.size());
  }
  const double perimeter = curve_length(winding_contour(spec, winding.chamber_index, winding.radial_offset));
  return (winding.chirality == Chirality::CCW ? 1.0 : -1.0) * pitch / perimeter;
}

std::vector<double> twist_estimate(const ActuatorSpec& spec, const WindingSpec& winding, const SolveResult& result,
                                   const SegmentModel& seg) {
  const double lead = net_lead(spec, winding);
  const double lever = lateral_lever(spec);
  const Vec3 tip0 = tip_position(spec, 0.0);
  std::vector<double> out;
  for (std::size_t i = 0; i < result.kappa.size(); ++i) {
    const double disp = (result.tip_xyz.col(static_cast<Eigen::Index>(i)) - tip0).norm();
    const double lateral = lead * result.kappa[i] * lever;
    out.push_back(disp > 0.0 ? seg.constants.k_twist * std::abs(lateral) / disp * 100.0 : 0.0);
  }
  return out;
}

InstabilityError::InstabilityError(double critical_pressure, double failed_pressure, SolveResult partial)
    : SolveError(fmt::format("geometric instability: expansion limit reached at {:.2f} kPa (requested {:.2f} kPa)",
                             critical_pressure, failed_pressure)),
      critical_(critical_pressure),
      failed_(failed_pressure),
      partial_(std::move(partial)) {}

PointSolution solve_point(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                          double pressure_kpa, const SegmentModel& seg) {
  const SectionModel section = build_section(spec, materials, seg);
  return solve_with_section(spec, winding, materials, section, pressure_kpa, seg, flexible_length(spec),
                            lateral_lever(spec), net_lead(spec, winding), tip_position(spec, 0.0));
}

SolveResult solve_quasi_static(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                               const PressureSchedule& schedule, const SegmentModel& seg) {
  const std::vector<double> levels = pressure_levels(schedule);
  const SectionModel section = build_section(spec, materials, seg);
  const double flex = flexible_length(spec);
  const double lever = lateral_lever(spec);
  const double lead = net_lead(spec, winding);
  const Vec3 tip0 = tip_position(spec, 0.0);
  const double p_crit = critical_pressure(spec, winding, materials, seg);

  SolveResult r;
  std::vector<Vec3> tips;
  auto finish = [&] {
    r.tip_xyz.resize(3, static_cast<Eigen::Index>(tips.size()));
    for (std::size_t i = 0; i < tips.size(); ++i) r.tip_xyz.col(static_cast<Eigen::Index>(i)) = tips[i];
  };
  for (double p : levels) {
    if (seg.check_instability && p > p_crit) {
      finish();
      throw InstabilityError(p_crit, p, r);
    }
    const PointSolution s = solve_with_section(spec, winding, materials, section, p, seg, flex, lever, lead, tip0);
    r.pressures.push_back(p);
    r.theta.push_back(s.theta);
    r.alpha.push_back(s.alpha);
    r.radial_expansion.push_back(s.expansion);
    r.twist_pct.push_back(s.twist_pct);
    const double alpha_raw = s.kappa * flex;
    r.kappa.push_back(alpha_raw > 2.0 * kPi ? s.kappa * (2.0 * kPi / alpha_raw) : s.kappa);
    r.residual.push_back(s.residual);
    tips.push_back(s.tip);
  }
  finish();
  return r;
}

std::string solve_csv(const SolveResult& r) {
  std::string out = "pressure_kPa,theta_deg,alpha_deg,expansion_mm,twist_pct,tip_x,tip_y,tip_z\n";
  for (std::size_t i = 0; i < r.pressures.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.pressures[i], r.theta[i],
                       r.alpha[i], r.radial_expansion[i], r.twist_pct[i], r.tip_xyz(0, c), r.tip_xyz(1, c),
                       r.tip_xyz(2, c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration

std::string ConfigKey::label() const {
  std::string s = fmt::format("{}{}", turns, to_string(style));
  if (halve_fibre) s += "_half_radius";
  if (device) s += payload ? "_device_payload" : "_device";
  return s;
}

std::vector<Anchor> default_anchors() {
  return {
      {{HelixStyle::SH, 30}, 100.0, 90.0, AnchorQuantity::Theta},
      {{HelixStyle::SH, 18}, 93.0, 2.6, AnchorQuantity::Expansion},
      {{HelixStyle::SH, 100}, 100.0, 2.06, AnchorQuantity::Twist},
      {{HelixStyle::DH, 30, true, false}, 100.0, 18.1, AnchorQuantity::Theta},
  };
}

WindingSpec winding_for(const ConfigKey& key) {
  WindingSpec w;
  w.style = key.style;
  w.turns = key.turns;
  w.chirality = Chirality::CW;
  return w;
}

namespace {

ActuatorSpec spec_for(const ConfigKey& key, const ActuatorSpec& base) {
  if (!key.device) return base;
  return compose_device(base, DeviceSpec{}, key.payload);
}

MaterialLibrary materials_for(const ConfigKey& key, const MaterialLibrary& materials) {
  MaterialLibrary m = materials;
  if (key.halve_fibre) m.halve_fibre_radius = true;
  return m;
}

// Golden-section search for the minimum of f over [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi, int iterations) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

// Root of a decreasing function g on [lo, hi]; clamps to the nearer end if
// the root is not bracketed.
double bisect_decreasing(const std::function<double(double)>& g, double lo, double hi, int iterations) {
  double glo = g(lo);
  if (glo <= 0.0) return lo;
  double ghi = g(hi);
  if (ghi >= 0.0) return hi;
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    (gm > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Fits one constant on a log scale against its anchors.
double fit_log_scalar(const std::vector<const Anchor*>& anchors, const std::function<double(const Anchor&, double)>& eval,
                      double lo, double hi) {
  if (anchors.size() == 1) {
    const Anchor& a = *anchors.front();
    return std::exp(bisect_decreasing([&](double u) { return eval(a, std::exp(u)) - a.target; }, std::log(lo),
                                      std::log(hi), 80));
  }
  auto sse = [&](double u) {
    double s = 0.0;
    for (const Anchor* a : anchors) {
      const double r = eval(*a, std::exp(u)) - a->target;
      s += r * r;
    }
    return s;
  };
  return std::exp(golden_min(sse, std::log(lo), std::log(hi), 100));
}

}  // namespace

double evaluate_anchor(const Anchor& anchor, const ActuatorSpec& base, const MaterialLibrary& materials,
                       const SegmentModel& seg) {
  const ActuatorSpec spec = spec_for(anchor.config, base);
  const MaterialLibrary mats = materials_for(anchor.config, materials);
  const WindingSpec w = winding_for(anchor.config);
  switch (anchor.quantity) {
    case AnchorQuantity::Expansion:
      return radial_expansion_model(spec, w, mats, anchor.pressure, seg);
    case AnchorQuantity::Theta:
      return solve_point(spec, w, mats, anchor.pressure, seg).theta;
    case AnchorQuantity::Twist:
      return solve_point(spec, w, mats, anchor.pressure, seg).twist_pct;
  }
  return 0.0;
}

CalibrationResult calibrate(const std::vector<Anchor>& anchors, const ActuatorSpec& base,
                            const MaterialLibrary& materials, const SegmentModel& seg) {
  if (anchors.empty()) throw ValidationError("calibration needs at least one anchor");
  CalibrationResult out;
  ModelConstants c = seg.constants;

  auto eval = [&](const Anchor& a, const ModelConstants& k) {
    if (++out.evaluations > kMaxCalibrationEvaluations)
      throw SolveError(fmt::format("calibration did not converge within {} evaluations", kMaxCalibrationEvaluations));
    SegmentModel s = seg;
    s.constants = k;
    return evaluate_anchor(a, base, materials, s);
  };

  std::vector<const Anchor*> expansion, bare, device, twist;
  for (const Anchor& a : anchors) {
    if (!(a.pressure >= 0.0)) throw ValidationError("anchor pressure must be >= 0");
    switch (a.quantity) {
      case AnchorQuantity::Expansion: expansion.push_back(&a); break;
      case AnchorQuantity::Twist: twist.push_back(&a); break;
      case AnchorQuantity::Theta: (a.config.device ? device : bare).push_back(&a); break;
    }
  }

  for (int pass = 0; pass < 20; ++pass) {
    const ModelConstants prev = c;
    if (!expansion.empty()) {
      // expansion is proportional to the scale: closed-form least squares
      ModelConstants unit = c;
      unit.expansion_scale = 1.0;
      double num = 0.0, den = 0.0;
      for (const Anchor* a : expansion) {
        const double g = eval(*a, unit);
        num += g * a->target;
        den += g * g;
      }
      if (!(den > 0.0)) throw SolveError("expansion anchors carry no signal");
      c.expansion_scale = num / den;
    }
    if (!bare.empty()) {
      // theta decreases as n0 grows
      c.n0 = fit_log_scalar(
          bare,
          [&](const Anchor& a, double v) {
            ModelConstants k = c;
            k.n0 = v;
            return eval(a, k);
          },
          1e-1, 1e5);
    }
    if (!device.empty()) {
      c.device_body_scale = fit_log_scalar(
          device,
          [&](const Anchor& a, double v) {
            ModelConstants k = c;
            k.device_body_scale = v;
            return eval(a, k);
          },
          1e-3, 1e3);
    }
    if (!twist.empty()) {
      ModelConstants unit = c;
      unit.k_twist = 1.0;
      double num = 0.0, den = 0.0;
      for (const Anchor* a : twist) {
        const double g = eval(*a, unit);
        num += g * a->target;
        den += g * g;
      }
      if (den > 0.0) c.k_twist = num / den;
    }
    auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
    if (pass > 0 && same(prev.n0, c.n0) && same(prev.k_twist, c.k_twist) &&
        same(prev.expansion_scale, c.expansion_scale) && same(prev.device_body_scale, c.device_body_scale))
      break;
  }

  out.constants = c;
  for (const Anchor& a : anchors) {
    const double v = eval(a, c);
    out.predicted.push_back(v);
    out.residuals.push_back(v - a.target);
  }
  return out;
}

std::vector<ReferenceCase> reference_cases() {
  return {
      {{HelixStyle::SH, 9}, 62.0, 61.12},
      {{HelixStyle::SH, 18}, 93.0, 86.12},
      {{HelixStyle::SH, 30}, 100.0, 90.00},
      {{HelixStyle::SH, 50}, 100.0, 106.04},
      {{HelixStyle::SH, 100}, 100.0, 148.80},
      {{HelixStyle::DH, 30, false, false, true}, 100.0, 98.72},
      {{HelixStyle::DH, 30}, 100.0, 99.05},
      {{HelixStyle::DH, 50}, 100.0, 98.13},
      {{HelixStyle::DH, 100}, 100.0, 180.00},
  };
}

double predict_case(const ReferenceCase& c, const ActuatorSpec& base, const MaterialLibrary& materials,
                    const SegmentModel& seg) {
  const ActuatorSpec spec = spec_for(c.config, base);
  const MaterialLibrary mats = materials_for(c.config, materials);
  const WindingSpec w = winding_for(c.config);
  const double p = std::min(c.pressure, critical_pressure(spec, w, mats, seg));
  return solve_point(spec, w, mats, p, seg).theta;
}

double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("kendall_tau_b needs two equal-length series");
  double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ties_a += 1.0;
      } else if (db == 0.0) {
        ties_b += 1.0;
      } else if ((da > 0.0) == (db > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return denom > 0.0 ? (concordant - discordant) / denom : 0.0;
}

// ---------------------------------------------------------------------------
// Workspace

WorkspaceResult workspace(const ActuatorSpec& spec, const WindingSpec& winding, const MaterialLibrary& materials,
                          const PressureSchedule& schedule, const SegmentModel& seg, const Corridor& corridor) {
  if (!(corridor.radius > 0.0 && corridor.length > 0.0)) throw ValidationError("corridor must have positive size");
  WorkspaceResult ws;
  SolveResult r;
  try {
    r = solve_quasi_static(spec, winding, materials, schedule, seg);
  } catch (const InstabilityError& e) {
    r = e.partial();
    ws.failure_pressure = e.critical_pressure();
  }
  ws.pressures = r.pressures;
  ws.tips = r.tip_xyz;
  ws.base = Vec3(0.0, spec.layer ? spec.layer->mid() : spec.flat_y, 0.0);
  const Eigen::Index n = ws.tips.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 t = ws.tips.col(i);
    ws.max_reach = std::max(ws.max_reach, (t - ws.base).norm());
    if (i > 0) ws.path_length += (t - Vec3(ws.tips.col(i - 1))).norm();
    const double radial = std::hypot(t.x(), t.y() - ws.base.y());
    if (radial > corridor.radius || t.z() < 0.0 || t.z() > corridor.length) ws.fits = false;
  }
  // fan polygon base -> tips in the bending (z, y) plane
  double area2 = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Vec2 p(ws.tips(2, i) - ws.base.z(), ws.tips(1, i) - ws.base.y());
    const Vec2 q(ws.tips(2, i + 1) - ws.base.z(), ws.tips(1, i + 1) - ws.base.y());
    area2 += p.x() * q.y() - q.x() * p.y();
  }
  ws.swept_area = 0.5 * std::abs(area2);
  return ws;
}

std::string workspace_csv(const WorkspaceResult& ws) {
  std::string out;
  out += fmt::format("# max_reach_mm={:.6f} swept_area_mm2={:.6f} path_length_mm={:.6f} fits={}\n", ws.max_reach,
                     ws.swept_area, ws.path_length, ws.fits ? "true" : "false");
  if (ws.failure_pressure) out += fmt::format("# instability_kPa={:.6f}\n", *ws.failure_pressure);
  out += "pressure_kPa,tip_x,tip_y,tip_z\n";
  for (Eigen::Index i = 0; i < ws.tips.cols(); ++i)
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}\n", ws.pressures[static_cast<std::size_t>(i)], ws.tips(0, i),
                       ws.tips(1, i), ws.tips(2, i));
  return out;
}

SegmentModel segment_model_from_kv(const KeyValues& kv) {
  KvReader r(kv, "model");
  SegmentModel s;
  s.n_segments = r.get_int("n_segments", s.n_segments);
  s.quadrature_order = r.get_int("quadrature_order", s.quadrature_order);
  s.quadrature_step = r.get_double("quadrature_step", s.quadrature_step);
  s.constants.n0 = r.get_double("n0", s.constants.n0);
  s.constants.k_twist = r.get_double("k_twist", s.constants.k_twist);
  s.constants.expansion_scale = r.get_double("expansion_scale", s.constants.expansion_scale);
  s.constants.device_body_scale = r.get_double("device_body_scale", s.constants.device_body_scale);
  s.constants.instability_fraction = r.get_double("instability_fraction", s.constants.instability_fraction);
  s.silicone = r.get_string("silicone", s.silicone);
  s.layer_material = r.get_string("layer_material", s.layer_material);
  s.body_material = r.get_string("body_material", s.body_material);
  s.check_instability = r.get_bool("check_instability", s.check_instability);
  r.finish();
  validate(s);
  return s;
}

}  // namespace fibrebend
