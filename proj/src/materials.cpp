#include "fibrebend/materials.hpp"

#include <fmt/format.h>

#include <fstream>
#include <numbers>
#include <sstream>

namespace fibrebend {

void validate(const HyperelasticModel& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          if (!(m.C10 + m.C01 > 0.0)) throw ValidationError("Mooney-Rivlin requires C10 + C01 > 0");
          if (m.D1 && !(*m.D1 > 0.0)) throw ValidationError("Mooney-Rivlin D1 must be > 0 when given");
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          if (!(m.C10 > 0.0)) throw ValidationError("Yeoh requires C10 > 0");
        } else {
          if (!(m.E > 0.0)) throw ValidationError("linear elastic requires E > 0");
          if (!(m.nu >= 0.0 && m.nu < 0.5)) throw ValidationError("linear elastic requires 0 <= nu < 0.5");
        }
      },
      model);
}

std::string model_kind(const HyperelasticModel& model) {
  static const char* names[] = {"mooney_rivlin", "yeoh", "linear_elastic"};
  return names[model.index()];
}

double small_strain_modulus(const HyperelasticModel& model) { return tangent_modulus(model, 1.0); }

double tangent_modulus(const HyperelasticModel& model, double lambda) {
  detail::require_positive(lambda);
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        const double inv = 1.0 / lambda;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          const double a = lambda * lambda - inv;
          const double b = m.C10 + m.C01 * inv;
          return 2.0 * ((2.0 * lambda + inv * inv) * b - a * m.C01 * inv * inv);
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          return 2.0 * m.C10 * (2.0 * lambda + inv * inv);
        } else {
          return m.E;
        }
      },
      model);
}

double nominal_tangent(const HyperelasticModel& model, double lambda) {
  const double s = uniaxial_stress(model, lambda);
  return (tangent_modulus(model, lambda) - s / lambda) / lambda;
}

MaterialLibrary MaterialLibrary::defaults() {
  MaterialLibrary lib;
  lib.entries_["ecoflex_00_50"] = {MooneyRivlin{0.022, 0.001, std::nullopt}, std::nullopt};
  lib.entries_["smooth_sil_960"] = {MooneyRivlin{0.7, 0.265, 1.25e-9}, std::nullopt};
  lib.entries_["dragon_skin_30"] = {MooneyRivlin{0.12, 0.12, std::nullopt}, std::nullopt};
  lib.entries_["fiberglass_layer"] = {Yeoh1{3.95}, std::nullopt};
  lib.entries_["kevlar"] = {LinearElastic{40000.0, 0.35}, 0.103};
  lib.entries_["clear_v4"] = {LinearElastic{2800.0, 0.35}, std::nullopt};
  return lib;
}

const Material& MaterialLibrary::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ValidationError("unknown material '" + name + "'");
  return it->second;
}

void MaterialLibrary::set(const std::string& name, Material m) {
  validate(m.model);
  if (m.fibre_radius && !(*m.fibre_radius > 0.0)) throw ValidationError("fibre radius must be > 0");
  entries_[name] = std::move(m);
}

double MaterialLibrary::fibre_radius() const {
  const Material& k = at("kevlar");
  if (!k.fibre_radius) throw ValidationError("kevlar entry has no fibre radius");
  return halve_fibre_radius ? 0.5 * *k.fibre_radius : *k.fibre_radius;
}

double MaterialLibrary::fibre_axial_stiffness() const {
  const double r = fibre_radius();
  return small_strain_modulus(at("kevlar").model) * std::numbers::pi * r * r;
}

namespace {

nlohmann::json model_json(const HyperelasticModel& model) {
  nlohmann::json j;
  j["kind"] = model_kind(model);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          j["C10"] = m.C10;
          j["C01"] = m.C01;
          if (m.D1) j["D1"] = *m.D1;
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          j["C10"] = m.C10;
        } else {
          j["E"] = m.E;
          j["nu"] = m.nu;
        }
      },
      model);
  return j;
}

HyperelasticModel model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mooney_rivlin") {
    MooneyRivlin m{j.at("C10").get<double>(), j.value("C01", 0.0), std::nullopt};
    if (j.contains("D1")) m.D1 = j.at("D1").get<double>();
    return m;
  }
  if (kind == "yeoh") return Yeoh1{j.at("C10").get<double>()};
  if (kind == "linear_elastic") return LinearElastic{j.at("E").get<double>(), j.at("nu").get<double>()};
  throw ValidationError("unknown material kind '" + kind + "'");
}

}  // namespace

nlohmann::json MaterialLibrary::to_json() const {
  nlohmann::json j;
  j["halve_fibre_radius"] = halve_fibre_radius;
  nlohmann::json mats = nlohmann::json::object();
  for (const auto& [name, m] : entries_) {
    nlohmann::json e = model_json(m.model);
    if (m.fibre_radius) e["fibre_radius"] = *m.fibre_radius;
    mats[name] = e;
  }
  j["materials"] = mats;
  return j;
}

MaterialLibrary MaterialLibrary::from_json(const nlohmann::json& j) {
  // Entries override the defaults; anything not listed keeps its reference value.
  MaterialLibrary lib = defaults();
  try {
    lib.halve_fibre_radius = j.value("halve_fibre_radius", false);
    if (j.contains("materials")) {
      for (const auto& [name, e] : j.at("materials").items()) {
        Material m{model_from_json(e), std::nullopt};
        if (e.contains("fibre_radius")) m.fibre_radius = e.at("fibre_radius").get<double>();
        lib.set(name, m);
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(fmt::format("material database: {}", ex.what()));
  }
  return lib;
}

MaterialLibrary MaterialLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open material database '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("material database '" + path + "' is not valid JSON");
  return from_json(j);
}

}  // namespace fibrebend
