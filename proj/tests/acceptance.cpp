// Exit gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "cli.hpp"

#include "fibrebend/csv.hpp"
#include "fibrebend/deck.hpp"
#include "fibrebend/errors.hpp"
#include "fibrebend/materials.hpp"
#include "fibrebend/mechanics.hpp"
#include "fibrebend/postprocess.hpp"

#include "support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using namespace fibrebend;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Verdict()> body;
};

bool within_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

Verdict geometry_anchors() {
  Verdict v;
  const ActuatorSpec a = build_geometry_a({});
  const ActuatorSpec b = build_geometry_b({});
  const double aa = a.metrics.cross_section_area, av = a.metrics.nominal_volume;
  const double ba = b.metrics.cross_section_area, bv = b.metrics.nominal_volume;
  v.check(within_rel(aa, 20.8, 0.01), fmt::format("A area {:.4f}", aa));
  v.check(within_rel(av, 552.0, 0.01), fmt::format("A volume {:.2f}", av));
  v.check(within_rel(ba, 25.13, 0.01), fmt::format("B area {:.4f}", ba));
  v.check(within_rel(bv, 666.0, 0.01), fmt::format("B volume {:.2f}", bv));
  v.note(fmt::format("A {:.3f} mm2 / {:.1f} mm3, B {:.3f} mm2 / {:.1f} mm3", aa, av, ba, bv));
  return v;
}

Verdict measurement_oracle() {
  Verdict v;
  const ActuatorSpec spec = build_geometry_a({});
  double worst = 0.0;
  for (double alpha : {30.0, 90.0, 180.0, 270.0}) {
    const auto f = fbtest::arc_fixture(spec, alpha * kPi / 180.0);
    const auto rows = analyze_histories(f.histories, spec, f.tip_id, ProportionalSchedule{});
    const double err = std::abs(rows.back().theta - alpha / 2.0);
    worst = std::max(worst, err);
    v.check(err <= 1e-6, fmt::format("alpha {} gave theta {:.9f}", alpha, rows.back().theta));
  }
  v.note(fmt::format("max |theta - alpha/2| = {:.2e} deg", worst));
  return v;
}

Verdict expansion_oracle() {
  Verdict v;
  const ActuatorSpec spec = build_geometry_a({});
  const auto nodes = fbtest::grid_nodes(spec);
  const auto pairs = select_radial_pairs(nodes, spec);
  v.check(pairs.size() == 12, fmt::format("{} pairs", pairs.size()));
  double worst = 0.0;
  for (double u : {0.1, 0.3, 1.0}) {
    const HistoryMap h = fbtest::make_histories(nodes, {0.0, 1.0}, [&](const Node& n, double t) -> Vec3 {
      return Vec3(0.0, u * t * (n.xyz.y() - spec.flat_y) / (spec.crown_y - spec.flat_y), 0.0);
    });
    const double err = std::abs(radial_expansion(pairs, h, 1.0).mean - u);
    worst = std::max(worst, err);
    v.check(err <= 1e-9, fmt::format("u {} error {:.2e}", u, err));
  }
  v.note(fmt::format("max error {:.2e} mm", worst));
  return v;
}

Verdict material_consistency() {
  Verdict v;
  double worst = 0.0;
  const MaterialLibrary lib = MaterialLibrary::defaults();
  for (const auto& [name, m] : lib.entries()) {
    v.check(uniaxial_stress(m.model, 1.0) == 0.0, name + " stress at identity");
    for (int i = 0; i <= 250; ++i) {
      const double l = 0.5 + 0.01 * i;
      if (std::abs(l - 1.0) < 1e-12) continue;  // relative error undefined at zero stress
      const double h = 1e-5 * l;
      auto w = [&](double s) {
        const double t = 1.0 / std::sqrt(s);
        return strain_energy(m.model, Eigen::Vector3d(s, t, t));
      };
      const double fd = l * (w(l + h) - w(l - h)) / (2.0 * h);
      const double s = uniaxial_stress(m.model, l);
      const double rel = std::abs(fd - s) / std::abs(s);
      worst = std::max(worst, rel);
      if (!(rel < 1e-4)) v.check(false, fmt::format("{} lambda {:.2f} rel {:.2e}", name, l, rel));
    }
  }
  v.note(fmt::format("max relative error {:.2e}", worst));
  return v;
}

// Shared by criteria 5, 6 and 7: constants fitted to the single bending anchor.
const SegmentModel& calibrated_model() {
  static const SegmentModel seg = [] {
    SegmentModel s;
    const CalibrationResult r = calibrate({Anchor{{HelixStyle::SH, 30}, 100.0, 90.0, AnchorQuantity::Theta}},
                                          build_geometry_a({}), MaterialLibrary::defaults(), s);
    s.constants = r.constants;
    return s;
  }();
  return seg;
}

Verdict calibrated_reproduction() {
  Verdict v;
  const ActuatorSpec base = build_geometry_a({});
  const MaterialLibrary mats = MaterialLibrary::defaults();
  const SegmentModel& seg = calibrated_model();

  const double anchor = evaluate_anchor(Anchor{{HelixStyle::SH, 30}, 100.0, 90.0}, base, mats, seg);
  v.check(std::abs(anchor - 90.0) <= 0.5, fmt::format("anchor {:.3f}", anchor));
  const double dh100 = evaluate_anchor(Anchor{{HelixStyle::DH, 100}, 100.0, 180.0}, base, mats, seg);
  v.check(std::abs(dh100 - 180.0) <= 1e-9, fmt::format("100 DH {:.3f}", dh100));

  // Rank everything except the anchor itself and the DH-50 case.
  std::vector<double> reference, predicted;
  for (const auto& c : reference_cases()) {
    const bool is_anchor = c.config.style == HelixStyle::SH && c.config.turns == 30;
    const bool dh50 = c.config.style == HelixStyle::DH && c.config.turns == 50;
    if (is_anchor || dh50) continue;
    reference.push_back(c.theta);
    predicted.push_back(predict_case(c, base, mats, seg));
  }
  const double tau = kendall_tau_b(reference, predicted);
  v.check(tau >= 0.8, fmt::format("Kendall tau {:.3f}", tau));
  v.note(fmt::format("anchor {:.2f} deg, 100 DH {:.1f} deg, tau {:.3f} over {} cases, n0 {:.3f}", anchor, dh100,
                     tau, reference.size(), seg.constants.n0));
  return v;
}

Verdict trend_properties() {
  Verdict v;
  const ActuatorSpec spec = build_geometry_a({});
  const MaterialLibrary mats = MaterialLibrary::defaults();
  const SegmentModel& seg = calibrated_model();
  const ProportionalSchedule ramp{1.0, 100.0, 20};

  std::map<int, double> sh_theta, critical;
  for (HelixStyle style : {HelixStyle::SH, HelixStyle::DH}) {
    for (int n : {9, 18, 30, 50, 100}) {
      WindingSpec w;
      w.style = style;
      w.turns = n;
      SolveResult r;
      std::optional<double> crit;
      try {
        r = solve_quasi_static(spec, w, mats, ramp, seg);
      } catch (const InstabilityError& e) {
        r = e.partial();
        crit = e.critical_pressure();
      }
      v.check(std::is_sorted(r.theta.begin(), r.theta.end()), fmt::format("{} {} not monotone", n, to_string(style)));
      if (style == HelixStyle::SH) {
        if (!r.theta.empty() && !crit) sh_theta[n] = r.theta.back();
        if (crit) critical[n] = *crit;
      }
    }
  }
  v.check(sh_theta.count(30) && sh_theta.count(50) && sh_theta.count(100), "SH 30/50/100 did not reach 100 kPa");
  if (sh_theta.size() >= 3)
    v.check(sh_theta[30] <= sh_theta[50] && sh_theta[50] <= sh_theta[100],
            fmt::format("SH theta {:.2f} {:.2f} {:.2f}", sh_theta[30], sh_theta[50], sh_theta[100]));

  double prev = std::numeric_limits<double>::infinity();
  for (int n : {9, 18, 30, 50, 100}) {
    WindingSpec w;
    w.turns = n;
    const double e = radial_expansion_model(spec, w, mats, 40.0, seg);
    v.check(e < prev, fmt::format("expansion not decreasing at {} turns", n));
    prev = e;
  }

  const std::map<int, double> expected{{9, 62.0}, {18, 93.0}};
  for (const auto& [n, p] : expected) {
    if (!critical.count(n)) {
      v.check(false, fmt::format("{} SH stable to 100 kPa", n));
      continue;
    }
    v.check(critical[n] < 100.0 && std::abs(critical[n] - p) <= 30.0,
            fmt::format("{} SH unstable at {:.2f} kPa", n, critical[n]));
  }
  v.note(fmt::format("SH theta 30/50/100 = {:.1f}/{:.1f}/{:.1f} deg, abort 9 SH {:.1f} kPa, 18 SH {:.1f} kPa",
                     sh_theta[30], sh_theta[50], sh_theta[100], critical[9], critical[18]));
  return v;
}

Verdict device_composition() {
  Verdict v;
  const ActuatorSpec base = build_geometry_a({});
  const MaterialLibrary mats = MaterialLibrary::defaults();
  const SegmentModel& seg = calibrated_model();
  auto theta = [&](bool device, bool payload) {
    return evaluate_anchor(Anchor{{HelixStyle::DH, 30, device, payload}, 100.0, 0.0}, base, mats, seg);
  };
  const double bare = theta(false, false), dev = theta(true, false), pay = theta(true, true);
  v.check(dev >= 13.0 && dev <= 23.0, fmt::format("device {:.2f} outside [13, 23]", dev));
  v.check(dev < bare, "device not below bare actuator");
  v.check(pay < dev, "payload did not reduce theta");
  v.note(fmt::format("bare {:.2f}, device {:.2f}, with payload {:.2f} deg", bare, dev, pay));
  return v;
}

Verdict hysteresis() {
  Verdict v;
  AngleSeries fwd, bwd;
  for (int i = 0; i <= 10; ++i) {
    fwd.pressures.push_back(10.0 * i);
    fwd.theta.push_back(9.0 * i);
  }
  for (int i = 10; i >= 0; --i) {
    bwd.pressures.push_back(10.0 * i);
    bwd.theta.push_back(9.0 * i + (i == 4 ? 4.5 : 0.0));
  }
  const HysteresisResult h = hysteresis_ratio(fwd, bwd);
  v.check(std::abs(h.ratio_pct - 5.0) <= 1e-12, fmt::format("constructed gap gave {:.12f}%", h.ratio_pct));
  const HysteresisResult z = hysteresis_ratio(fwd, fwd);
  v.check(z.ratio_pct == 0.0, "identical curves nonzero");
  v.note(fmt::format("constructed {:.6f}% (expected 5%), identical {}%; bench value needs bench data", h.ratio_pct,
                     z.ratio_pct));
  return v;
}

Verdict deck_export() {
  Verdict v;
  for (GeometryKind kind : {GeometryKind::A, GeometryKind::B}) {
    const ActuatorSpec spec = kind == GeometryKind::A ? build_geometry_a({}) : build_geometry_b({});
    std::vector<FiberPath> paths{generate_helix(spec, {})};
    if (kind == GeometryKind::B) paths.push_back(mirror_path(paths[0]));
    const FemDeck d = emit_deck(spec, paths, MaterialLibrary::defaults(), ProportionalSchedule{});
    const std::string text = serialize(d);
    v.check(parse_deck(text) == d, "round trip changed the deck");
    v.check(serialize(parse_deck(text)) == text, "re-serialization differs");
  }
  v.check(smooth_amplitude(0.0) == 0.0 && smooth_amplitude(1.0) == 1.0, "amplitude endpoints");
  const double h = 1e-5;
  const double d0 = std::abs(smooth_amplitude(h) - smooth_amplitude(0.0)) / h;
  const double d1 = std::abs(smooth_amplitude(1.0) - smooth_amplitude(1.0 - h)) / h;
  v.check(d0 <= 1e-8 && d1 <= 1e-8, fmt::format("endpoint slopes {:.1e} {:.1e}", d0, d1));
  v.note(fmt::format("endpoint slopes {:.1e}, {:.1e}", d0, d1));
  return v;
}

Verdict determinism() {
  Verdict v;
  const fs::path a = fbtest::temp_dir("accept_sweep_a"), b = fbtest::temp_dir("accept_sweep_b");
  std::ostringstream sink;
  v.check(cli::dispatch({"-o", a.string(), "sweep"}, sink, sink) == cli::kExitOk, "first sweep failed");
  v.check(cli::dispatch({"-o", b.string(), "sweep"}, sink, sink) == cli::kExitOk, "second sweep failed");
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".svg") continue;
    const fs::path other = b / fs::relative(e.path(), a);
    ++compared;
    v.check(fs::exists(other) && read_text(other) == read_text(e.path()),
            fs::relative(e.path(), a).string() + " differs");
  }
  v.check(compared > 0, "no artifacts produced");
  v.note(fmt::format("{} CSV/SVG files identical", compared));
  fs::remove_all(a);
  fs::remove_all(b);
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "geometry anchors", 1.0, geometry_anchors},
      {2, "bending-angle oracle", 1.0, measurement_oracle},
      {3, "radial-expansion oracle", 1.0, expansion_oracle},
      {4, "material stress consistency", 5.0, material_consistency},
      {5, "calibrated reproduction", 30.0, calibrated_reproduction},
      {6, "trend properties", 30.0, trend_properties},
      {7, "device composition", 30.0, device_composition},
      {8, "hysteresis ratio", 1.0, hysteresis},
      {9, "deck export", 5.0, deck_export},
      {10, "sweep determinism", 30.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(dt <= c.budget_s, fmt::format("took {:.2f} s, budget {:.0f} s", dt, c.budget_s));
    if (!v.pass) ++failed;
    fmt::print("[{}] {:>2}. {} ({:.3f} s): {}\n", v.pass ? "PASS" : "FAIL", c.id, c.name, dt, v.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
