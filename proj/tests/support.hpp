#pragma once

// Synthetic node fields shared by the postprocess, CLI and acceptance tests.

#include "fibrebend/geometry.hpp"
#include "fibrebend/postprocess.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

namespace fbtest {

using fibrebend::ActuatorSpec;
using fibrebend::HistoryMap;
using fibrebend::Node;
using fibrebend::NodeHistory;
using fibrebend::Vec3;

/// Nodes on the flat-side and crown centrelines every `dz` mm over the
/// whole actuator length.
inline std::vector<Node> grid_nodes(const ActuatorSpec& spec, double dz = 0.5, long long first_id = 1) {
  std::vector<Node> out;
  long long id = first_id;
  const int n = static_cast<int>(std::round(spec.total_length() / dz));
  for (int k = 0; k <= n; ++k) {
    out.push_back({id++, Vec3(0.0, spec.flat_y, k * dz)});
    out.push_back({id++, Vec3(0.0, spec.crown_y, k * dz)});
  }
  return out;
}

/// Tip of a constant-curvature arc of `length` starting at `ref` along +z
/// and bending towards -y through `alpha` radians.
inline Vec3 arc_point(const Vec3& ref, double length, double alpha) {
  if (alpha == 0.0) return ref + Vec3(0.0, 0.0, length);
  const double k = alpha / length;
  return ref + Vec3(0.0, -(1.0 - std::cos(alpha)) / k, std::sin(alpha) / k);
}

using DisplacementField = std::function<Vec3(const Node&, double t)>;

inline HistoryMap make_histories(const std::vector<Node>& nodes, const std::vector<double>& times,
                                 const DisplacementField& u) {
  HistoryMap out;
  for (const Node& n : nodes) {
    NodeHistory h;
    h.node_id = n.id;
    h.initial = n.xyz;
    h.times = times;
    h.displacements.resize(3, static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) h.displacements.col(static_cast<Eigen::Index>(i)) = u(n, times[i]);
    out.emplace(n.id, h);
  }
  return out;
}

/// Sidecar and history CSV text in the ingestion schema.
inline std::pair<std::string, std::string> to_csv(const HistoryMap& histories) {
  std::string nodes = "node_id,x0,y0,z0\n";
  std::string disp = "node_id,t,ux_mm,uy_mm,uz_mm\n";
  for (const auto& [id, h] : histories) {
    nodes += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", id, h.initial.x(), h.initial.y(), h.initial.z());
    for (std::size_t i = 0; i < h.times.size(); ++i) {
      const auto c = h.displacements.col(static_cast<Eigen::Index>(i));
      disp += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", id, h.times[i], c.x(), c.y(), c.z());
    }
  }
  return {nodes, disp};
}

/// Grid mesh plus one tip node following a constant-curvature arc about
/// the reference point; alpha grows linearly to `alpha_end` at t = 1.
struct ArcFixture {
  HistoryMap histories;
  long long tip_id = 0;
  std::vector<double> times;
};

inline ArcFixture arc_fixture(const ActuatorSpec& spec, double alpha_end, int steps = 4) {
  ArcFixture f;
  for (int i = 0; i <= steps; ++i) f.times.push_back(static_cast<double>(i) / steps);
  std::vector<Node> nodes = grid_nodes(spec);
  const Vec3 ref = fibrebend::reference_point(spec);
  const double length = spec.total_length();
  f.tip_id = 100000;
  nodes.push_back({f.tip_id, arc_point(ref, length, 0.0)});
  f.histories = make_histories(nodes, f.times, [&](const Node& n, double t) -> Vec3 {
    if (n.id != f.tip_id) return Vec3::Zero();
    return arc_point(ref, length, alpha_end * t) - n.xyz;
  });
  return f;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("fibrebend_{}_{}", name, ::getpid());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fbtest
