#pragma once

// Constitutive models. Units are MPa and mm throughout; stretches are
// dimensionless.

#include "fibrebend/errors.hpp"

#include <Eigen/Core>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace fibrebend {

struct MooneyRivlin {
  double C10 = 0.0;
  double C01 = 0.0;
  std::optional<double> D1;  // 1/MPa; absent means strictly incompressible

  bool operator==(const MooneyRivlin&) const = default;
};

struct Yeoh1 {
  double C10 = 0.0;

  bool operator==(const Yeoh1&) const = default;
};

/// Small-strain isotropic solid written in log strains so it stays
/// well-defined at large stretch. Under incompressible uniaxial loading the
/// Cauchy stress is exactly E * (lambda - 1).
struct LinearElastic {
  double E = 0.0;
  double nu = 0.0;

  bool operator==(const LinearElastic&) const = default;
};

using HyperelasticModel = std::variant<MooneyRivlin, Yeoh1, LinearElastic>;

void validate(const HyperelasticModel& model);
std::string model_kind(const HyperelasticModel& model);

/// Tangent of the uniaxial Cauchy stress at the reference state.
double small_strain_modulus(const HyperelasticModel& model);

namespace detail {

inline void require_positive(double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("stretch must be > 0");
}

template <typename Scalar>
Scalar mr_like_energy(double c10, double c01, std::optional<double> d1, Eigen::Matrix<Scalar, 3, 1> l) {
  using std::cbrt;
  using std::pow;
  const Scalar J = l(0) * l(1) * l(2);
  const Scalar Jm23 = Scalar(1) / cbrt(J * J);
  const Eigen::Matrix<Scalar, 3, 1> sq = l.cwiseAbs2();
  const Scalar I1 = sq.sum();
  const Scalar I2 = sq(0) * sq(1) + sq(1) * sq(2) + sq(0) * sq(2);
  const Scalar I1b = Jm23 * I1;
  const Scalar I2b = Jm23 * Jm23 * I2;
  Scalar W = c10 * (I1b - Scalar(3)) + c01 * (I2b - Scalar(3));
  if (d1 && *d1 > 0.0) W += (J - Scalar(1)) * (J - Scalar(1)) / *d1;
  return W;
}

}  // namespace detail

/// Strain energy density for principal stretches. Stretches are sorted
/// first so the result is exactly invariant under permutation.
template <typename Scalar>
Scalar strain_energy(const HyperelasticModel& model, Eigen::Matrix<Scalar, 3, 1> stretches) {
  for (int i = 0; i < 3; ++i) detail::require_positive(static_cast<double>(stretches(i)));
  std::sort(stretches.data(), stretches.data() + 3);
  return std::visit(
      [&](const auto& m) -> Scalar {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          return detail::mr_like_energy<Scalar>(m.C10, m.C01, m.D1, stretches);
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          return detail::mr_like_energy<Scalar>(m.C10, 0.0, std::nullopt, stretches);
        } else {
          using std::exp;
          using std::log;
          using std::sqrt;
          const Eigen::Matrix<Scalar, 3, 1> eps = stretches.array().log().matrix();
          const Scalar lnJ = eps.sum();
          const Eigen::Matrix<Scalar, 3, 1> dev = eps.array() - lnJ / Scalar(3);
          const Scalar s2 = dev.squaredNorm();
          const Scalar s3 = dev.array().cube().sum();
          const Scalar mag = sqrt(Scalar(2) / Scalar(3) * s2);
          const Scalar e = s3 < Scalar(0) ? -mag : mag;
          const double K = m.E / (3.0 * (1.0 - 2.0 * m.nu));
          return m.E * (exp(e) - Scalar(1) - e) + Scalar(0.5 * K) * lnJ * lnJ;
        }
      },
      model);
}

inline double strain_energy(const HyperelasticModel& model, const Eigen::Vector3d& stretches) {
  return strain_energy<double>(model, stretches);
}

/// Incompressible uniaxial Cauchy stress.
template <typename Scalar>
Scalar uniaxial_stress(const HyperelasticModel& model, Scalar lambda) {
  detail::require_positive(static_cast<double>(lambda));
  return std::visit(
      [&](const auto& m) -> Scalar {
        using M = std::decay_t<decltype(m)>;
        const Scalar inv = Scalar(1) / lambda;
        if constexpr (std::is_same_v<M, MooneyRivlin>) {
          return Scalar(2) * (lambda * lambda - inv) * (m.C10 + m.C01 * inv);
        } else if constexpr (std::is_same_v<M, Yeoh1>) {
          return Scalar(2 * m.C10) * (lambda * lambda - inv);
        } else {
          return m.E * (lambda - Scalar(1));
        }
      },
      model);
}

inline double uniaxial_stress(const HyperelasticModel& model, double lambda) {
  return uniaxial_stress<double>(model, lambda);
}

/// d(sigma)/d(lambda) of the uniaxial Cauchy stress.
double tangent_modulus(const HyperelasticModel& model, double lambda);

/// Uniaxial nominal (first Piola) stress, sigma / lambda.
inline double nominal_stress(const HyperelasticModel& model, double lambda) {
  return uniaxial_stress(model, lambda) / lambda;
}

/// d(nominal)/d(lambda).
double nominal_tangent(const HyperelasticModel& model, double lambda);

struct Material {
  HyperelasticModel model;
  std::optional<double> fibre_radius;  // mm, fibres only

  bool operator==(const Material&) const = default;
};

class MaterialLibrary {
 public:
  /// The six reference materials.
  static MaterialLibrary defaults();
  static MaterialLibrary from_json(const nlohmann::json& j);
  static MaterialLibrary load(const std::string& path);

  const Material& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  void set(const std::string& name, Material m);
  const std::map<std::string, Material>& entries() const { return entries_; }

  /// Model the fibre at half its radius.
  bool halve_fibre_radius = false;

  /// Radius of the `kevlar` entry, honouring `halve_fibre_radius`.
  double fibre_radius() const;
  /// Fibre axial stiffness E * A in N.
  double fibre_axial_stiffness() const;

  nlohmann::json to_json() const;

 private:
  std::map<std::string, Material> entries_;
};

}  // namespace fibrebend
