#include "fibrebend/postprocess.hpp"

#include "fibrebend/csv.hpp"
#include "fibrebend/errors.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace fibrebend {

Vec3 NodeHistory::displacement_at(double t) const {
  if (times.empty()) throw ValidationError(fmt::format("node {} has no history", node_id));
  if (t < times.front() || t > times.back())
    throw ValidationError(fmt::format("node {}: t = {} outside history [{}, {}]", node_id, t, times.front(),
                                      times.back()));
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto i = static_cast<Eigen::Index>(it - times.begin());
  if (*it == t) return displacements.col(i);
  const double f = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return (1.0 - f) * displacements.col(i - 1) + f * displacements.col(i);
}

void validate(const NodeHistory& h) {
  if (static_cast<Eigen::Index>(h.times.size()) != h.displacements.cols())
    throw ValidationError(fmt::format("node {}: times and displacements differ in length", h.node_id));
  for (std::size_t i = 1; i < h.times.size(); ++i)
    if (!(h.times[i] > h.times[i - 1]))
      throw ValidationError(fmt::format("node {}: times not strictly increasing", h.node_id));
}

Vec3 reference_point(const ActuatorSpec& spec) { return Vec3(0.0, spec.flat_y, 0.0); }

double bending_angle(const Vec3& ref, const Vec3& tip_initial, const Vec3& tip_current) {
  const Vec3 v0 = tip_initial - ref;
  const Vec3 v = tip_current - ref;
  const double scale = std::max(v0.norm(), 1.0);
  if (v0.norm() <= 1e-12 * scale || v.norm() <= 1e-12 * scale)
    throw ValidationError("bending angle undefined: tip coincides with the reference point");
  return std::atan2(v0.cross(v).norm(), v0.dot(v)) * 180.0 / std::numbers::pi;
}

double bending_angle(const Vec3& ref, const NodeHistory& tip, double t) {
  return bending_angle(ref, tip.initial, tip.position_at(t));
}

std::vector<RadialPair> select_radial_pairs(const std::vector<Node>& nodes, const ActuatorSpec& spec, int n_pairs,
                                            double spacing) {
  if (nodes.empty()) throw ValidationError("no nodes to select radial pairs from");
  if (n_pairs < 1) throw ValidationError("n_pairs must be >= 1");
  if (!(spacing > 0.0)) throw ValidationError("spacing must be > 0");

  auto nearest = [&](const Vec3& target) -> const Node* {
    const Node* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Node& n : nodes) {
      const double d = (n.xyz - target).squaredNorm();
      if (d < best_d || (d == best_d && best && n.id < best->id)) {
        best = &n;
        best_d = d;
      }
    }
    if (std::sqrt(best_d) > 0.5 * spacing) return nullptr;
    return best;
  };

  std::vector<RadialPair> pairs;
  for (int k = 0; k < n_pairs; ++k) {
    const double z = spec.cap_length + std::min(k * spacing, spec.chamber_length);
    const Node* a = nearest(Vec3(0.0, spec.flat_y, z));
    const Node* b = nearest(Vec3(0.0, spec.crown_y, z));
    if (!a || !b)
      throw ValidationError(fmt::format("no surface node within {} mm of station {} (z = {} mm)", 0.5 * spacing, k, z));
    pairs.push_back({a->id, b->id, z, (a->xyz - b->xyz).norm()});
  }
  return pairs;
}

ExpansionPoint radial_expansion(const std::vector<RadialPair>& pairs, const HistoryMap& histories, double t) {
  if (pairs.empty()) throw ValidationError("no radial pairs");
  auto history = [&](long long id) -> const NodeHistory& {
    auto it = histories.find(id);
    if (it == histories.end()) throw ValidationError(fmt::format("missing history for node {}", id));
    return it->second;
  };
  ExpansionPoint out;
  for (const auto& p : pairs) {
    const NodeHistory& a = history(p.flat_node);
    const NodeHistory& b = history(p.curved_node);
    const double now = (a.position_at(t) - b.position_at(t)).norm();
    const double ref = (a.initial - b.initial).norm();
    out.per_pair.push_back(now - ref);
  }
  out.mean = std::accumulate(out.per_pair.begin(), out.per_pair.end(), 0.0) / static_cast<double>(out.per_pair.size());
  return out;
}

namespace {

std::vector<std::size_t> ascending_order(const std::vector<double>& p) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return idx;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace

HysteresisResult hysteresis_ratio(const AngleSeries& forward, const AngleSeries& backward) {
  if (forward.pressures.size() != forward.theta.size() || backward.pressures.size() != backward.theta.size())
    throw ValidationError("angle series: pressures and angles differ in length");
  if (forward.pressures.empty()) throw ValidationError("empty angle series");
  if (forward.pressures.size() != backward.pressures.size())
    throw ValidationError("hysteresis: forward and backward legs have different pressure grids");
  const auto fo = ascending_order(forward.pressures);
  const auto bo = ascending_order(backward.pressures);
  HysteresisResult h;
  std::vector<double> fwd;
  double peak = 0.0;
  double max_gap = 0.0;
  for (std::size_t i = 0; i < fo.size(); ++i) {
    const double p = forward.pressures[fo[i]];
    if (std::abs(p - backward.pressures[bo[i]]) > 1e-9 * std::max(1.0, std::abs(p)))
      throw ValidationError(fmt::format("hysteresis: pressure grids differ at {} kPa", p));
    const double gap = std::abs(backward.theta[bo[i]] - forward.theta[fo[i]]);
    h.pressures.push_back(p);
    h.gap.push_back(gap);
    fwd.push_back(forward.theta[fo[i]]);
    peak = std::max(peak, forward.theta[fo[i]]);
    max_gap = std::max(max_gap, gap);
  }
  if (!(peak > 0.0)) throw ValidationError("hysteresis: forward leg never bends");
  h.ratio_pct = max_gap / peak * 100.0;
  const double under = trapezoid(h.pressures, fwd);
  h.loop_area_ratio_pct = under > 0.0 ? trapezoid(h.pressures, h.gap) / under * 100.0 : 0.0;
  return h;
}

std::pair<AngleSeries, AngleSeries> split_legs(const AngleSeries& record) {
  if (record.pressures.empty()) throw ValidationError("empty angle series");
  const auto peak = static_cast<std::size_t>(
      std::max_element(record.pressures.begin(), record.pressures.end()) - record.pressures.begin());
  AngleSeries fwd, bwd;
  for (std::size_t i = 0; i < record.pressures.size(); ++i) {
    if (i <= peak) {
      fwd.pressures.push_back(record.pressures[i]);
      fwd.theta.push_back(record.theta[i]);
    }
    if (i >= peak) {
      bwd.pressures.push_back(record.pressures[i]);
      bwd.theta.push_back(record.theta[i]);
    }
  }
  return {fwd, bwd};
}

HistoryMap load_histories(const std::string& nodes_csv, const std::string& displacements_csv) {
  const CsvTable nodes = parse_csv(nodes_csv);
  const CsvTable disp = parse_csv(displacements_csv);
  HistoryMap out;
  const auto nid = nodes.column("node_id");
  const auto x0 = nodes.column("x0"), y0 = nodes.column("y0"), z0 = nodes.column("z0");
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    NodeHistory h;
    h.node_id = nodes.integer(r, nid);
    h.initial = Vec3(nodes.number(r, x0), nodes.number(r, y0), nodes.number(r, z0));
    if (!out.emplace(h.node_id, h).second) throw ValidationError(fmt::format("duplicate node {}", h.node_id));
  }
  const auto did = disp.column("node_id"), tc = disp.column("t");
  const auto ux = disp.column("ux_mm"), uy = disp.column("uy_mm"), uz = disp.column("uz_mm");
  std::map<long long, std::vector<std::pair<double, Vec3>>> samples;
  for (std::size_t r = 0; r < disp.rows.size(); ++r) {
    const long long id = disp.integer(r, did);
    if (!out.count(id)) throw ValidationError(fmt::format("displacement for unknown node {}", id));
    samples[id].emplace_back(disp.number(r, tc), Vec3(disp.number(r, ux), disp.number(r, uy), disp.number(r, uz)));
  }
  for (auto& [id, s] : samples) {
    NodeHistory& h = out.at(id);
    h.displacements.resize(3, static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      h.times.push_back(s[i].first);
      h.displacements.col(static_cast<Eigen::Index>(i)) = s[i].second;
    }
    validate(h);
  }
  return out;
}

std::vector<Node> nodes_of(const HistoryMap& histories) {
  std::vector<Node> out;
  for (const auto& [id, h] : histories) out.push_back({id, h.initial});
  return out;
}

AngleSeries load_bench_log(const std::string& csv) {
  const CsvTable t = parse_csv(csv);
  const auto pc = t.column("pressure_kPa"), ac = t.column("theta_deg");
  t.column("timestamp");
  AngleSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.pressures.push_back(t.number(r, pc));
    s.theta.push_back(t.number(r, ac));
  }
  if (s.pressures.empty()) throw ValidationError("bench log has no rows");
  return s;
}

std::vector<AnalysisRow> analyze_histories(const HistoryMap& histories, const ActuatorSpec& spec, long long tip_node,
                                           const PressureSchedule& schedule, int n_pairs, double spacing) {
  auto it = histories.find(tip_node);
  if (it == histories.end()) throw ValidationError(fmt::format("tip node {} not found", tip_node));
  const NodeHistory& tip = it->second;
  const std::vector<RadialPair> pairs = select_radial_pairs(nodes_of(histories), spec, n_pairs, spacing);
  const Vec3 ref = reference_point(spec);
  std::vector<AnalysisRow> rows;
  for (double t : tip.times) {
    AnalysisRow r;
    r.t = t;
    r.pressure = time_to_pressure(schedule, t);
    r.theta = bending_angle(ref, tip, t);
    r.mean_expansion = radial_expansion(pairs, histories, t).mean;
    rows.push_back(r);
  }
  return rows;
}

std::string analysis_csv(const std::vector<AnalysisRow>& rows) {
  std::string out = "t,pressure_kPa,theta_deg,expansion_mm\n";
  for (const auto& r : rows) out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}\n", r.t, r.pressure, r.theta, r.mean_expansion);
  return out;
}

std::string hysteresis_csv(const HysteresisResult& h) {
  std::string out = fmt::format("# hysteresis_ratio_pct={:.6f} loop_area_ratio_pct={:.6f}\n", h.ratio_pct,
                                h.loop_area_ratio_pct);
  out += "pressure_kPa,gap_deg\n";
  for (std::size_t i = 0; i < h.pressures.size(); ++i) out += fmt::format("{:.6f},{:.6f}\n", h.pressures[i], h.gap[i]);
  return out;
}

}  // namespace fibrebend
