#include "fibrebend/deck.hpp"

#include "fibrebend/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace fibrebend {

double smooth_amplitude(double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ValidationError(fmt::format("amplitude argument {} outside [0, 1]", xi));
  return xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi);
}

bool DeckFibreSet::operator==(const DeckFibreSet& o) const {
  if (name != o.name || material != o.material || element != o.element || radius != o.radius ||
      polylines.size() != o.polylines.size())
    return false;
  for (std::size_t i = 0; i < polylines.size(); ++i) {
    if (polylines[i].cols() != o.polylines[i].cols()) return false;
    if (polylines[i] != o.polylines[i]) return false;
  }
  return true;
}

void validate(const FemDeck& deck) {
  std::set<std::string> surfaces, materials, groups, sets, amplitudes;
  for (const auto& s : deck.surfaces)
    if (!surfaces.insert(s.name).second) throw ValidationError("duplicate surface tag " + s.name);
  for (const auto& m : deck.materials) {
    validate(m.material.model);
    materials.insert(m.name);
  }
  for (const auto& a : deck.amplitudes) {
    if (a.points.empty() || a.points.front() != std::pair{0.0, 0.0} || a.points.back() != std::pair{1.0, 1.0})
      throw ValidationError("amplitude " + a.name + " must span (0, 0) to (1, 1)");
    amplitudes.insert(a.name);
  }
  auto need_material = [&](const std::string& m) {
    if (!materials.count(m)) throw ValidationError("undefined material " + m);
  };
  for (const auto& g : deck.solids) {
    groups.insert(g.name);
    for (const auto& s : g.sections) need_material(s.material);
  }
  for (const auto& f : deck.fibres) {
    need_material(f.material);
    sets.insert(f.name);
  }
  for (const auto& c : deck.constraints) {
    if (c.kind != "MERGE" && c.kind != "TIE") throw ValidationError("unknown constraint " + c.kind);
    for (const auto& end : {c.a, c.b}) {
      bool known = groups.count(end) || sets.count(end);
      for (const auto& g : deck.solids)
        for (const auto& s : g.sections) known = known || s.region == end;
      if (!known) throw ValidationError("constraint references undefined set " + end);
    }
  }
  int encastre = 0;
  for (const auto& b : deck.boundaries) {
    if (!surfaces.count(b.surface)) throw ValidationError("boundary on undefined surface tag " + b.surface);
    if (b.type == "ENCASTRE") ++encastre;
  }
  if (encastre != 1) throw ValidationError(fmt::format("deck needs exactly one encastre, has {}", encastre));
  for (const auto& l : deck.loads) {
    if (!surfaces.count(l.surface)) throw ValidationError("load on undefined surface tag " + l.surface);
    if (!amplitudes.count(l.amplitude)) throw ValidationError("load uses undefined amplitude " + l.amplitude);
  }
}

FemDeck emit_deck(const ActuatorSpec& spec, const std::vector<FiberPath>& paths, const MaterialLibrary& materials,
                  const PressureSchedule& schedule) {
  FemDeck d;
  d.geometry = to_json(spec);

  d.surfaces.push_back({"CAP_BASE", "cap_base"});
  d.surfaces.push_back({"OUTER", "outer"});
  for (std::size_t i = 0; i < spec.chambers.size(); ++i) d.surfaces.push_back({fmt::format("CHAMBER_{}", i), "chamber_wall"});

  std::vector<std::string> used{"ecoflex_00_50", "smooth_sil_960", "kevlar"};
  if (spec.layer) used.push_back("fiberglass_layer");
  std::sort(used.begin(), used.end());
  for (const auto& name : used) {
    Material m = materials.at(name);
    if (name == "kevlar") m.fibre_radius = materials.fibre_radius();
    d.materials.push_back({name, m});
  }

  // Co-moulded silicone bodies and the fabric are merged into one solid.
  DeckSolidGroup solid{"ACTUATOR", "C3D10H", {}};
  solid.sections.push_back({"BODY", "ecoflex_00_50"});
  if (spec.layer) solid.sections.push_back({"LAYER", "fiberglass_layer"});
  solid.sections.push_back({"CAPS", "smooth_sil_960"});
  if (spec.device_body) solid.sections.push_back({"DEVICE_BODY", "ecoflex_00_50"});
  d.solids.push_back(solid);

  if (!paths.empty()) {
    DeckFibreSet f{"FIBRES", "kevlar", "B32", materials.fibre_radius(), {}};
    for (const auto& p : paths) f.polylines.push_back(p.points);
    d.fibres.push_back(std::move(f));
  }

  if (spec.layer) d.constraints.push_back({"MERGE", "BODY", "LAYER"});
  d.constraints.push_back({"TIE", "BODY", "CAPS"});
  if (spec.device_body) d.constraints.push_back({"MERGE", "BODY", "DEVICE_BODY"});
  if (!paths.empty()) d.constraints.push_back({"TIE", "FIBRES", "ACTUATOR"});

  d.boundaries.push_back({"ENCASTRE", "CAP_BASE"});
  d.amplitudes.push_back({"RAMP", "SMOOTH_STEP", {{0.0, 0.0}, {1.0, 1.0}}});

  const std::vector<double> levels = pressure_levels(schedule);
  const double p_max = *std::max_element(levels.begin(), levels.end());
  for (std::size_t i = 0; i < spec.chambers.size(); ++i)
    d.loads.push_back({"PRESSURE", fmt::format("CHAMBER_{}", i), p_max, "RAMP"});

  validate(d);
  return d;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string material_params(const Material& m) {
  std::string s = "kind=" + model_kind(m.model);
  std::visit(
      [&](const auto& x) {
        using M = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          s += ", C10=" + num(x.C10) + ", C01=" + num(x.C01);
          if (x.D1) s += ", D1=" + num(*x.D1);
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          s += ", C10=" + num(x.C10);
        } else {
          s += ", E=" + num(x.E) + ", nu=" + num(x.nu);
        }
      },
      m.model);
  if (m.fibre_radius) s += ", fibre_radius=" + num(*m.fibre_radius);
  return s;
}

}  // namespace

std::string serialize(const FemDeck& deck) {
  validate(deck);
  std::string out = fmt::format("FIBREBEND-DECK version={}\n", deck.version);
  out += "*GEOMETRY\n" + deck.geometry.dump() + "\n";
  for (const auto& s : deck.surfaces) out += fmt::format("*SURFACE name={}, role={}\n", s.name, s.role);
  for (const auto& m : deck.materials) out += fmt::format("*MATERIAL name={}, {}\n", m.name, material_params(m.material));
  for (const auto& g : deck.solids) {
    out += fmt::format("*SOLID_GROUP name={}, element={}\n", g.name, g.element);
    for (const auto& s : g.sections)
      out += fmt::format("*SECTION group={}, region={}, material={}\n", g.name, s.region, s.material);
  }
  for (const auto& f : deck.fibres) {
    out += fmt::format("*FIBRE_SET name={}, material={}, element={}, radius={}\n", f.name, f.material, f.element,
                       num(f.radius));
    for (const auto& pl : f.polylines) {
      out += fmt::format("*POLYLINE set={}, points={}\n", f.name, pl.cols());
      for (Eigen::Index i = 0; i < pl.cols(); ++i)
        out += num(pl(0, i)) + ", " + num(pl(1, i)) + ", " + num(pl(2, i)) + "\n";
    }
  }
  for (const auto& c : deck.constraints) out += fmt::format("*{} a={}, b={}\n", c.kind, c.a, c.b);
  for (const auto& b : deck.boundaries) out += fmt::format("*BOUNDARY type={}, surface={}\n", b.type, b.surface);
  for (const auto& a : deck.amplitudes) {
    out += fmt::format("*AMPLITUDE name={}, kind={}, points={}\n", a.name, a.kind, a.points.size());
    for (const auto& [x, y] : a.points) out += num(x) + ", " + num(y) + "\n";
  }
  for (const auto& l : deck.loads)
    out += fmt::format("*LOAD type={}, surface={}, magnitude={}, amplitude={}\n", l.type, l.surface,
                       num(l.magnitude), l.amplitude);
  out += "*END\n";
  return out;
}

namespace {

class DeckReader {
 public:
  explicit DeckReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line_no() const { return pos_; }
  const std::string& next() {
    if (done()) throw ValidationError("deck: unexpected end of input");
    return lines_[pos_++];
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

using Params = std::map<std::string, std::string>;

Params parse_params(const std::string& s, std::size_t line) {
  Params p;
  if (boost::algorithm::trim_copy(s).empty()) return p;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  for (auto& part : parts) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ValidationError(fmt::format("deck line {}: expected key=value", line));
    p[boost::algorithm::trim_copy(part.substr(0, eq))] = boost::algorithm::trim_copy(part.substr(eq + 1));
  }
  return p;
}

const std::string& req(const Params& p, const std::string& key, std::size_t line) {
  auto it = p.find(key);
  if (it == p.end()) throw ValidationError(fmt::format("deck line {}: missing '{}'", line, key));
  return it->second;
}

double to_num(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError(fmt::format("deck line {}: '{}' is not a number", line, s));
  return v;
}

std::vector<double> number_row(const std::string& s, std::size_t n, std::size_t line) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  if (parts.size() != n) throw ValidationError(fmt::format("deck line {}: expected {} values", line, n));
  std::vector<double> out;
  for (auto& p : parts) out.push_back(to_num(boost::algorithm::trim_copy(p), line));
  return out;
}

std::size_t count_param(const Params& p, std::size_t line) {
  const double v = to_num(req(p, "points", line), line);
  if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError(fmt::format("deck line {}: bad point count", line));
  return static_cast<std::size_t>(v);
}

Material material_from(const Params& p, std::size_t line) {
  const std::string& kind = req(p, "kind", line);
  Material m;
  auto get = [&](const char* k) { return to_num(req(p, k, line), line); };
  if (kind == "mooney_rivlin") {
    MooneyRivlin mr{get("C10"), get("C01"), std::nullopt};
    if (p.count("D1")) mr.D1 = get("D1");
    m.model = mr;
  } else if (kind == "yeoh") {
    m.model = Yeoh1{get("C10")};
  } else if (kind == "linear_elastic") {
    m.model = LinearElastic{get("E"), get("nu")};
  } else {
    throw ValidationError(fmt::format("deck line {}: unknown material kind '{}'", line, kind));
  }
  if (p.count("fibre_radius")) m.fibre_radius = get("fibre_radius");
  return m;
}

}  // namespace

FemDeck parse_deck(const std::string& text) {
  DeckReader r(text);
  FemDeck d;
  const std::string header = r.next();
  const std::string prefix = "FIBREBEND-DECK version=";
  if (header.rfind(prefix, 0) != 0) throw ValidationError("deck: missing FIBREBEND-DECK header");
  d.version = static_cast<int>(to_num(header.substr(prefix.size()), 1));
  if (d.version != kDeckVersion) throw ValidationError(fmt::format("deck: unsupported version {}", d.version));

  bool ended = false;
  while (!r.done()) {
    const std::size_t ln = r.line_no() + 1;
    const std::string line = r.next();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    if (line.front() != '*') throw ValidationError(fmt::format("deck line {}: expected a keyword", ln));
    const auto sp = line.find(' ');
    const std::string kw = line.substr(1, sp == std::string::npos ? std::string::npos : sp - 1);
    const Params p = parse_params(sp == std::string::npos ? "" : line.substr(sp + 1), ln);

    if (kw == "END") {
      ended = true;
      break;
    } else if (kw == "GEOMETRY") {
      d.geometry = nlohmann::json::parse(r.next(), nullptr, false);
      if (d.geometry.is_discarded()) throw ValidationError(fmt::format("deck line {}: bad geometry JSON", ln + 1));
    } else if (kw == "SURFACE") {
      d.surfaces.push_back({req(p, "name", ln), req(p, "role", ln)});
    } else if (kw == "MATERIAL") {
      d.materials.push_back({req(p, "name", ln), material_from(p, ln)});
    } else if (kw == "SOLID_GROUP") {
      d.solids.push_back({req(p, "name", ln), req(p, "element", ln), {}});
    } else if (kw == "SECTION") {
      const std::string& g = req(p, "group", ln);
      auto it = std::find_if(d.solids.begin(), d.solids.end(), [&](const auto& s) { return s.name == g; });
      if (it == d.solids.end()) throw ValidationError(fmt::format("deck line {}: undefined group {}", ln, g));
      it->sections.push_back({req(p, "region", ln), req(p, "material", ln)});
    } else if (kw == "FIBRE_SET") {
      d.fibres.push_back({req(p, "name", ln), req(p, "material", ln), req(p, "element", ln),
                          to_num(req(p, "radius", ln), ln), {}});
    } else if (kw == "POLYLINE") {
      const std::string& s = req(p, "set", ln);
      auto it = std::find_if(d.fibres.begin(), d.fibres.end(), [&](const auto& f) { return f.name == s; });
      if (it == d.fibres.end()) throw ValidationError(fmt::format("deck line {}: undefined fibre set {}", ln, s));
      const std::size_t n = count_param(p, ln);
      Eigen::Matrix3Xd pts(3, static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = number_row(r.next(), 3, ln + 1 + i);
        pts.col(static_cast<Eigen::Index>(i)) = Vec3(v[0], v[1], v[2]);
      }
      it->polylines.push_back(std::move(pts));
    } else if (kw == "MERGE" || kw == "TIE") {
      d.constraints.push_back({kw, req(p, "a", ln), req(p, "b", ln)});
    } else if (kw == "BOUNDARY") {
      d.boundaries.push_back({req(p, "type", ln), req(p, "surface", ln)});
    } else if (kw == "AMPLITUDE") {
      DeckAmplitude a{req(p, "name", ln), req(p, "kind", ln), {}};
      const std::size_t n = count_param(p, ln);
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = number_row(r.next(), 2, ln + 1 + i);
        a.points.emplace_back(v[0], v[1]);
      }
      d.amplitudes.push_back(std::move(a));
    } else if (kw == "LOAD") {
      d.loads.push_back(
          {req(p, "type", ln), req(p, "surface", ln), to_num(req(p, "magnitude", ln), ln), req(p, "amplitude", ln)});
    } else {
      throw ValidationError(fmt::format("deck line {}: unknown keyword *{}", ln, kw));
    }
  }
  if (!ended) throw ValidationError("deck: missing *END");
  validate(d);
  return d;
}

}  // namespace fibrebend
