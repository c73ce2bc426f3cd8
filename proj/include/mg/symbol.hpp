#pragma once

// The magneto-geostrophic Fourier multiplier u = M[theta].

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "mg/error.hpp"
#include "mg/params.hpp"
#include "mg/plane.hpp"

namespace mg {

struct SymbolValue {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;

  double operator[](int j) const { return j == 0 ? m1 : (j == 1 ? m2 : m3); }
  double abs() const { return std::sqrt(m1 * m1 + m2 * m2 + m3 * m3); }
  double max_abs() const {
    return std::max({std::fabs(m1), std::fabs(m2), std::fabs(m3)});
  }
  /// k . M(k); zero for the exact multiplier.
  double dot(const Wavevector& k) const {
    return static_cast<double>(k.k1) * m1 + static_cast<double>(k.k2) * m2 +
           static_cast<double>(k.k3) * m3;
  }
};

/// D(k) = N^4 |k|^2 k3^2 + k2^4.
inline double eval_denominator(const Wavevector& k, const PhysParams& params) {
  const double n4 = params.n2 * params.n2;
  const double k2 = static_cast<double>(k.k2);
  const double k3 = static_cast<double>(k.k3);
  const double ksq = static_cast<double>(k.norm_sq());
  return n4 * ksq * k3 * k3 + k2 * k2 * k2 * k2;
}

/// The multiplier components, evaluated from the unsimplified numerators over
/// D. Zero on the slab k3 == 0 (which includes k == 0).
inline SymbolValue eval_symbol(const Wavevector& k, const PhysParams& params) {
  if (k.k3 == 0) return {};
  const double n2 = params.n2;
  const double n4 = n2 * n2;
  const double k1 = static_cast<double>(k.k1);
  const double k2 = static_cast<double>(k.k2);
  const double k3 = static_cast<double>(k.k3);
  const double ksq = static_cast<double>(k.norm_sq());
  const double d = eval_denominator(k, params);
  SymbolValue s;
  s.m1 = (n4 * k2 * k3 * ksq - n2 * k1 * k2 * k2 * k3) / d;
  s.m2 = (-n4 * k1 * k3 * ksq - n2 * k2 * k2 * k2 * k3) / d;
  s.m3 = (n2 * k1 * k1 * k2 * k2 + n2 * k2 * k2 * k2 * k2) / d;
  return s;
}

/// Orientation of the Coriolis term in the force balance.
///
/// `u_cross_e3` reproduces the multiplier returned by eval_symbol.
/// `e3_cross_u` is the opposite orientation; it flips the sign of the N^4
/// contribution to the two horizontal components and leaves M3 unchanged.
enum class Coriolis { u_cross_e3, e3_cross_u };

/// Velocity of a single Fourier mode with unit buoyancy amplitude, obtained by
/// solving the transformed force balance, induction and incompressibility
/// equations as a dense 7x7 complex system in (u, b, P).
///
/// Rows: three momentum components, three induction components and k . u = 0;
/// k . b = 0 follows from the induction rows and is checked after the solve.
/// Throws SingularSystem when the assembled matrix is rank deficient.
struct BalanceSolution {
  std::array<std::complex<double>, 3> u{};
  std::array<std::complex<double>, 3> b{};
  std::complex<double> pressure{};
  double max_imag_u = 0.0;
  double div_b = 0.0;

  SymbolValue real_velocity() const { return {u[0].real(), u[1].real(), u[2].real()}; }
};

inline BalanceSolution solve_balance(const Wavevector& k, const PhysParams& params,
                                     Coriolis orientation = Coriolis::u_cross_e3) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const double n2 = params.n2;
  const double k1 = static_cast<double>(k.k1);
  const double k2 = static_cast<double>(k.k2);
  const double k3 = static_cast<double>(k.k3);
  const double ksq = static_cast<double>(k.norm_sq());
  // (e3 x u) = (-u2, u1, 0); the other orientation negates it.
  const double c = orientation == Coriolis::e3_cross_u ? n2 : -n2;

  // unknowns: u1 u2 u3 b1 b2 b3 P
  Eigen::Matrix<cd, 7, 7> a = Eigen::Matrix<cd, 7, 7>::Zero();
  Eigen::Matrix<cd, 7, 1> rhs = Eigen::Matrix<cd, 7, 1>::Zero();

  // Coriolis + grad P - (e2 . grad) b = N^2 theta e3
  a(0, 1) = -c;
  a(0, 6) = i * k1;
  a(0, 3) = -i * k2;
  a(1, 0) = c;
  a(1, 6) = i * k2;
  a(1, 4) = -i * k2;
  a(2, 6) = i * k3;
  a(2, 5) = -i * k2;
  rhs(2) = n2;
  // (e2 . grad) u + Laplacian b = 0
  for (int j = 0; j < 3; ++j) {
    a(3 + j, j) = i * k2;
    a(3 + j, 3 + j) = -ksq;
  }
  // k . u = 0
  a(6, 0) = k1;
  a(6, 1) = k2;
  a(6, 2) = k3;

  Eigen::FullPivLU<Eigen::Matrix<cd, 7, 7>> lu(a);
  lu.setThreshold(1e-13);
  if (lu.rank() < 7) {
    throw SingularSystem("balance system is singular at k = " + to_string(k));
  }
  const Eigen::Matrix<cd, 7, 1> x = lu.solve(rhs);

  BalanceSolution out;
  for (int j = 0; j < 3; ++j) {
    out.u[j] = x(j);
    out.b[j] = x(3 + j);
    out.max_imag_u = std::max(out.max_imag_u, std::fabs(x(j).imag()));
  }
  out.pressure = x(6);
  out.div_b = std::abs(k1 * x(3) + k2 * x(4) + k3 * x(5));
  return out;
}

/// Independent re-derivation of eval_symbol from the force balance.
inline SymbolValue balance_oracle(const Wavevector& k, const PhysParams& params,
                                  Coriolis orientation = Coriolis::u_cross_e3) {
  if (k.k3 == 0) throw InvalidArgument("balance_oracle: requires k3 != 0");
  return solve_balance(k, params, orientation).real_velocity();
}

/// Largest |M_j(k)| over the frequency plane P_q inside the cube |k|_inf <= k_max
/// (k3 != 0). The plane bound is finite; see plane_bound_plateau for the
/// doubling check.
inline double plane_bound_scan(std::int64_t q_num, std::int64_t q_den, std::int64_t k_max,
                               const PhysParams& params) {
  if (q_num == 0) throw InvalidPlane("plane_bound_scan: q_num must be nonzero");
  if (k_max < 1) throw InvalidArgument("plane_bound_scan: k_max must be >= 1");
  const PlaneSpec plane(q_num, q_den);
  const std::int64_t a = plane.q_den();
  const std::int64_t b = plane.q_num() < 0 ? -plane.q_num() : plane.q_num();
  const std::int64_t t_max = k_max / std::max(a, b);
  double best = 0.0;
  for (std::int64_t t = -t_max; t <= t_max; ++t) {
    for (std::int64_t k3 = -k_max; k3 <= k_max; ++k3) {
      if (k3 == 0) continue;
      const Wavevector k{plane.q_den() * t, plane.q_num() * t, k3};
      best = std::max(best, eval_symbol(k, params).max_abs());
    }
  }
  return best;
}

/// Doubles k_max from `k_start` until the plane bound grows by less than
/// `rel_tol`, returning the last value. Throws Error if no plateau is reached
/// by `k_limit`.
inline double plane_bound_plateau(std::int64_t q_num, std::int64_t q_den,
                                  const PhysParams& params, std::int64_t k_start = 4,
                                  std::int64_t k_limit = 4096, double rel_tol = 0.01) {
  double prev = plane_bound_scan(q_num, q_den, k_start, params);
  for (std::int64_t k = 2 * k_start; k <= k_limit; k *= 2) {
    const double cur = plane_bound_scan(q_num, q_den, k, params);
    if (cur <= prev * (1.0 + rel_tol)) return cur;
    prev = cur;
  }
  throw Error("plane_bound_plateau: no plateau up to k_max = " + std::to_string(k_limit));
}

struct GrowthRow {
  std::int64_t j = 0;
  double k_norm = 0.0;
  double symbol_abs = 0.0;
  double ratio = 0.0;  // |M(k)| / |k|
};

struct GrowthScan {
  std::vector<GrowthRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// |M(k)| along the curved family k = (j^2, j, 1), j = 2..j_max, where the
/// multiplier grows linearly in |k|.
inline GrowthScan growth_scan(std::int64_t j_max, const PhysParams& params) {
  if (j_max < 2) throw InvalidArgument("growth_scan: j_max must be >= 2");
  GrowthScan scan;
  scan.min_ratio = INFINITY;
  scan.max_ratio = 0.0;
  for (std::int64_t j = 2; j <= j_max; ++j) {
    const Wavevector k{j * j, j, 1};
    GrowthRow row;
    row.j = j;
    row.k_norm = std::sqrt(static_cast<double>(k.norm_sq()));
    row.symbol_abs = eval_symbol(k, params).abs();
    row.ratio = row.symbol_abs / row.k_norm;
    scan.min_ratio = std::min(scan.min_ratio, row.ratio);
    scan.max_ratio = std::max(scan.max_ratio, row.ratio);
    scan.rows.push_back(row);
  }
  return scan;
}

}  // namespace mg
