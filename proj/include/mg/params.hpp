#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "mg/error.hpp"

namespace mg {

/// Model constants of the magneto-geostrophic equation.
///
/// `n2` is the inverse Elsasser number N^2, `eps_kappa` the inverse Peclet
/// number, `gamma` the exponent of the dissipation (-Laplacian)^gamma and `m`
/// the vertical wavenumber of the steady profile sin(m x3).
struct PhysParams {
  double n2 = 1.0;
  double eps_kappa = 0.0;
  double gamma = 1.0;
  int m = 1;

  /// Throws InvalidArgument unless n2 > 0, eps_kappa >= 0, gamma in (0,1]
  /// and m >= 1.
  void validate() const {
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      throw InvalidArgument("PhysParams: n2 must be positive and finite");
    }
    if (!(eps_kappa >= 0.0) || !std::isfinite(eps_kappa)) {
      throw InvalidArgument("PhysParams: eps_kappa must be nonnegative");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw InvalidArgument("PhysParams: gamma must lie in (0, 1]");
    }
    if (m < 1) {
      throw InvalidArgument("PhysParams: m must be a positive integer");
    }
  }

  bool nondiffusive() const { return eps_kappa == 0.0; }

  /// eps_kappa * |k|^(2 gamma), the dissipation rate of a mode with squared
  /// magnitude `k_sq`.
  double dissipation_rate(double k_sq) const {
    if (eps_kappa == 0.0 || k_sq == 0.0) return 0.0;
    if (gamma == 1.0) return eps_kappa * k_sq;
    return eps_kappa * std::pow(k_sq, gamma);
  }
};

/// Integer frequency triple on Z^3.
struct Wavevector {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  std::int64_t k3 = 0;

  constexpr Wavevector operator-() const { return {-k1, -k2, -k3}; }
  constexpr bool operator==(const Wavevector&) const = default;

  constexpr std::int64_t norm_sq() const { return k1 * k1 + k2 * k2 + k3 * k3; }
  constexpr std::int64_t linf() const {
    auto a = [](std::int64_t v) { return v < 0 ? -v : v; };
    std::int64_t r = a(k1);
    if (a(k2) > r) r = a(k2);
    if (a(k3) > r) r = a(k3);
    return r;
  }
};

inline std::string to_string(const Wavevector& k) {
  return "(" + std::to_string(k.k1) + "," + std::to_string(k.k2) + "," +
         std::to_string(k.k3) + ")";
}

}  // namespace mg
