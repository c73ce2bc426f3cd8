#pragma once

// Unstable eigenvalues of the MG operator linearised about sin(m x3).
//
// The ansatz theta = exp(sigma t) sin(k1 x1) sin(k2 x2) sum_p c_p sin(m p x3)
// turns the eigenvalue problem into the three-term recurrence
//
//   sigma_p c_p + c_{p+1} / alpha_{p+1} + c_{p-1} / alpha_{p-1} = 0   (p >= 2)
//   sigma_1 c_1 + c_2 / alpha_2 = 0
//
// whose decaying solution exists exactly when sigma solves
//
//   sigma_1 alpha_1 = 1 / (sigma_2 alpha_2 - 1 / (sigma_3 alpha_3 - ...)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mg/error.hpp"
#include "mg/params.hpp"
#include "mg/spectral_field.hpp"

namespace mg {

/// Horizontal frequencies (k1, k2) of the ansatz; both nonzero.
struct ModePair {
  std::int64_t k1 = 1;
  std::int64_t k2 = 1;

  void validate() const {
    if (k1 == 0 || k2 == 0) {
      throw InvalidArgument("ModePair: k1 and k2 must be nonzero");
    }
  }
  double horizontal_sq() const {
    return static_cast<double>(k1) * static_cast<double>(k1) +
           static_cast<double>(k2) * static_cast<double>(k2);
  }
};

/// alpha_p, from 2 / alpha_p = m N^2 k2^2 (k1^2 + k2^2) / (N^4 (mp)^2 (k1^2 + k2^2 + (mp)^2) + k2^4).
/// Increasing in p, asymptotically proportional to p^4.
inline double alpha(int p, const ModePair& mode, const PhysParams& params) {
  if (p < 1) throw InvalidArgument("alpha: p must be >= 1");
  const double n2 = params.n2;
  const double mp = static_cast<double>(params.m) * p;
  const double kh = mode.horizontal_sq();
  const double k2sq = static_cast<double>(mode.k2) * static_cast<double>(mode.k2);
  const double num = n2 * n2 * mp * mp * (kh + mp * mp) + k2sq * k2sq;
  return 2.0 * num / (static_cast<double>(params.m) * n2 * k2sq * kh);
}

/// Dissipation offset eps_kappa (k1^2 + k2^2 + (mp)^2)^gamma, so that
/// sigma_p = sigma + offset.
inline double dissipation_offset(int p, const ModePair& mode, const PhysParams& params) {
  const double mp = static_cast<double>(params.m) * p;
  return params.dissipation_rate(mode.horizontal_sq() + mp * mp);
}

inline double sigma_p(double sigma, int p, const ModePair& mode, const PhysParams& params) {
  if (p < 1) throw InvalidArgument("sigma_p: p must be >= 1");
  return sigma + dissipation_offset(p, mode, params);
}

/// Precomputed alpha_p and offsets for p = 1..depth.
struct RecurrenceTable {
  std::vector<double> alpha;   // alpha[p-1]
  std::vector<double> offset;  // sigma_p - sigma, index p-1

  RecurrenceTable(const ModePair& mode, const PhysParams& params, int depth) {
    mode.validate();
    params.validate();
    alpha.resize(static_cast<std::size_t>(depth));
    offset.resize(static_cast<std::size_t>(depth));
    for (int p = 1; p <= depth; ++p) {
      alpha[p - 1] = mg::alpha(p, mode, params);
      offset[p - 1] = dissipation_offset(p, mode, params);
    }
  }
  int depth() const { return static_cast<int>(alpha.size()); }
};

/// Relative floor below which an intermediate tail value T_p counts as degenerate.
inline constexpr double kTailFloor = 1e-14;

namespace detail {

/// sigma_1 alpha_1 - 1/T_2 with T_depth = sigma_depth alpha_depth and
/// T_p = sigma_p alpha_p - 1/T_{p+1}; nullopt when some T_p (p >= 2) falls to
/// or below kTailFloor * |sigma_p alpha_p|.
inline std::optional<double> cf_eval(double sigma, const RecurrenceTable& t) {
  const int depth = t.depth();
  double tail = 0.0;
  for (int p = depth; p >= 2; --p) {
    const double head = (sigma + t.offset[p - 1]) * t.alpha[p - 1];
    const double tp = p == depth ? head : head - 1.0 / tail;
    if (!(tp > kTailFloor * std::fabs(head))) return std::nullopt;
    tail = tp;
  }
  return (sigma + t.offset[0]) * t.alpha[0] - 1.0 / tail;
}

}  // namespace detail

/// Truncated continued-fraction residual; its roots in sigma are eigenvalues.
/// Throws DegenerateTail when an intermediate tail value collapses.
inline double cf_residual(double sigma, int depth, const ModePair& mode, const PhysParams& params) {
  if (depth < 3) throw InvalidArgument("cf_residual: depth must be >= 3");
  if (!(sigma > 0.0)) throw InvalidArgument("cf_residual: sigma must be positive");
  const RecurrenceTable table(mode, params, depth);
  const auto r = detail::cf_eval(sigma, table);
  if (!r) {
    throw DegenerateTail("cf_residual: tail degenerate at sigma = " + std::to_string(sigma) +
                         ", depth = " + std::to_string(depth));
  }
  return *r;
}

/// Minimal (decaying) solution of the recurrence by backward recursion from
/// c_depth = 1, c_{depth+1} = 0, normalised so that c_1 = alpha_1. Element
/// p-1 holds c_p.
inline std::vector<double> backward_coefficients(double sigma_star, int depth, const ModePair& mode,
                                                 const PhysParams& params) {
  if (depth < 3) throw InvalidArgument("backward_coefficients: depth must be >= 3");
  const RecurrenceTable t(mode, params, depth);
  std::vector<double> c(static_cast<std::size_t>(depth) + 1, 0.0);  // c[p-1] = c_p, c[depth] = c_{depth+1}
  c[depth - 1] = 1.0;
  constexpr double kRescale = 1e200;
  for (int p = depth; p >= 2; --p) {
    // c_{p-1} = -alpha_{p-1} (sigma_p c_p + c_{p+1} / alpha_{p+1})
    const double next = p < depth ? c[p] / t.alpha[p] : 0.0;
    const double sp = sigma_star + t.offset[p - 1];
    c[p - 2] = -t.alpha[p - 2] * (sp * c[p - 1] + next);
    if (std::fabs(c[p - 2]) > kRescale) {
      for (int q = p - 2; q < depth; ++q) c[q] /= kRescale;
    }
  }
  c.pop_back();
  if (!std::isfinite(c[0]) || c[0] == 0.0) {
    throw RecursionInstability("backward_coefficients: cannot normalise c_1 at depth " +
                               std::to_string(depth));
  }
  const double scale = t.alpha[0] / c[0];
  for (double& v : c) v *= scale;
  for (double v : c) {
    if (!std::isfinite(v)) {
      throw RecursionInstability("backward_coefficients: non-finite coefficient after rescaling");
    }
  }
  c[0] = t.alpha[0];
  return c;
}

struct EigenSolution {
  double sigma_star = 0.0;
  std::vector<double> c;  // c[p-1] = c_p
  ModePair mode;
  PhysParams params;
  int depth = 0;
  double residual = 0.0;      // cf_residual at sigma_star
  // sigma range where 1/(alpha_1 alpha_2) <= sigma_1 sigma_2 <= 2/(alpha_1 alpha_2)
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  // interval actually searched: [0, Gershgorin bound]
  double search_lo = 0.0;
  double search_hi = 0.0;
  int sign_changes = 0;  // continuous sign changes seen on a scan of the search interval

  /// sigma_1 sigma_2 alpha_1 alpha_2 at the root; the two-sided product bound asks for [1, 2].
  double bracket_ratio() const {
    const RecurrenceTable t(mode, params, 2);
    return (sigma_star + t.offset[0]) * (sigma_star + t.offset[1]) * t.alpha[0] * t.alpha[1];
  }
  bool in_bracket() const {
    const double r = bracket_ratio();
    return r >= 1.0 && r <= 2.0;
  }
};

/// Closed-form bounds on the eigenvalue.
struct EigenBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline EigenBounds bounds_check(const ModePair& mode, const PhysParams& params) {
  mode.validate();
  params.validate();
  const double n2 = params.n2;
  const double n4 = n2 * n2;
  const double m = params.m;
  const double kh = mode.horizontal_sq();
  const double k2sq = static_cast<double>(mode.k2) * static_cast<double>(mode.k2);
  EigenBounds b;
  b.lower = m * n2 / 2.0 * k2sq * kh / (4.0 * n4 * m * m * (kh + 4.0 * m * m) + k2sq * k2sq) -
            params.dissipation_rate(kh + 4.0 * m * m);
  b.upper = m * n2 * k2sq * kh / (n4 * m * m * (kh + m * m) + k2sq * k2sq) -
            params.dissipation_rate(kh + m * m);
  return b;
}

/// Product (sigma + e1)(sigma + e2) for the first two shifted growth rates.
inline double sigma12_product(double sigma, const ModePair& mode, const PhysParams& params) {
  return sigma_p(sigma, 1, mode, params) * sigma_p(sigma, 2, mode, params);
}

namespace detail {

/// sigma >= -e1 solving (sigma + e1)(sigma + e2) = target.
inline double solve_product(double e1, double e2, double target) {
  const double d = e1 - e2;
  return 0.5 * (-(e1 + e2) + std::sqrt(d * d + 4.0 * target));
}

/// Gershgorin bound on the largest eigenvalue of the truncated recurrence,
/// written as the symmetric tridiagonal matrix with diagonal -e_p and
/// off-diagonal -1/sqrt(alpha_p alpha_{p+1}).
inline double gershgorin_bound(const RecurrenceTable& t) {
  const int depth = t.depth();
  double g = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < depth; ++i) {
    double r = 0.0;
    if (i > 0) r += 1.0 / std::sqrt(t.alpha[i - 1] * t.alpha[i]);
    if (i + 1 < depth) r += 1.0 / std::sqrt(t.alpha[i] * t.alpha[i + 1]);
    g = std::max(g, -t.offset[i] + r);
  }
  return g;
}

inline EigenSolution solve_at_depth(const ModePair& mode, const PhysParams& params, int depth) {
  const RecurrenceTable t(mode, params, depth);
  const double a12 = t.alpha[0] * t.alpha[1];
  EigenSolution sol;
  sol.mode = mode;
  sol.params = params;
  sol.depth = depth;
  sol.bracket_lo = solve_product(t.offset[0], t.offset[1], 1.0 / a12);
  sol.bracket_hi = solve_product(t.offset[0], t.offset[1], 2.0 / a12);

  // Every root lies below the Gershgorin bound, where all tails are positive.
  const double g = gershgorin_bound(t);
  double lo = 0.0;
  double hi = std::max(g, sol.bracket_hi);
  hi += 1e-12 * std::max(1.0, std::fabs(hi));
  if (!(g > 0.0)) {
    throw NoRoot("solve_sigma_star: stable mode, Gershgorin bound " + std::to_string(g) +
                     " <= 0; product bracket [" + std::to_string(sol.bracket_lo) + ", " +
                     std::to_string(sol.bracket_hi) + "]",
                 sol.bracket_lo, sol.bracket_hi);
  }
  const auto r_hi = cf_eval(hi, t);
  if (!r_hi || *r_hi <= 0.0) {
    throw NoRoot("solve_sigma_star: residual not positive at " + std::to_string(hi),
                 sol.bracket_lo, sol.bracket_hi);
  }
  const auto r_lo = cf_eval(lo, t);
  if (r_lo && *r_lo > 0.0) {
    throw NoRoot("solve_sigma_star: stable mode, no sign change of the residual in [" +
                     std::to_string(lo) + ", " + std::to_string(hi) + "]; product bracket [" +
                     std::to_string(sol.bracket_lo) + ", " + std::to_string(sol.bracket_hi) + "]",
                 sol.bracket_lo, sol.bracket_hi);
  }
  sol.search_lo = lo;
  sol.search_hi = hi;

  // Count continuous sign changes across the search interval.
  constexpr int kScan = 32;
  std::optional<double> prev = r_lo;
  for (int i = 1; i <= kScan; ++i) {
    const double s = lo + (hi - lo) * i / kScan;
    const auto r = cf_eval(s, t);
    if (prev && r && ((*prev < 0.0) != (*r < 0.0))) ++sol.sign_changes;
    prev = r;
  }

  // Bisection; a degenerate tail means sigma lies below the largest root.
  double f_hi = *r_hi;
  std::optional<double> f_lo = r_lo;
  for (int it = 0; it < 400 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const auto r = cf_eval(mid, t);
    if (!r || *r < 0.0) {
      lo = mid;
      f_lo = r;
    } else {
      hi = mid;
      f_hi = *r;
    }
  }

  // Secant refinement inside the final bisection interval.
  double best = hi;
  double best_r = f_hi;
  if (f_lo) {
    if (std::fabs(*f_lo) < std::fabs(best_r)) {
      best = lo;
      best_r = *f_lo;
    }
    double a = lo, fa = *f_lo, b = hi, fb = f_hi;
    for (int it = 0; it < 8 && fb != fa && best_r != 0.0; ++it) {
      const double s = b - fb * (b - a) / (fb - fa);
      if (!(s >= sol.search_lo && s <= sol.search_hi)) break;
      const auto rs = cf_eval(s, t);
      if (!rs) break;
      a = b;
      fa = fb;
      b = s;
      fb = *rs;
      if (std::fabs(fb) < std::fabs(best_r)) {
        best = s;
        best_r = fb;
      } else {
        break;
      }
    }
  }
  sol.sigma_star = best;
  sol.residual = best_r;
  return sol;
}

}  // namespace detail

inline constexpr int kDefaultDepth = 64;
inline constexpr int kMaxDepth = 16384;

/// Largest real root of the continued-fraction equation, located by bisection
/// between 0 and a Gershgorin bound and polished with secant steps. The root is
/// the largest eigenvalue of the truncated recurrence; whether it satisfies
/// 1/(alpha_1 alpha_2) <= sigma_1 sigma_2 <= 2/(alpha_1 alpha_2) is reported by
/// EigenSolution::in_bracket, not assumed. With `auto_depth` the truncation depth is
/// doubled until the root moves by less than 1e-12.
///
/// Throws NoRoot for a stable mode (no positive eigenvalue).
inline EigenSolution solve_sigma_star(const ModePair& mode, const PhysParams& params,
                                      int depth = kDefaultDepth, bool auto_depth = true) {
  if (depth < 3) throw InvalidArgument("solve_sigma_star: depth must be >= 3");
  mode.validate();
  params.validate();
  EigenSolution sol = detail::solve_at_depth(mode, params, depth);
  if (auto_depth) {
    while (depth < kMaxDepth) {
      depth *= 2;
      EigenSolution next = detail::solve_at_depth(mode, params, depth);
      const bool settled = std::fabs(next.sigma_star - sol.sigma_star) < 1e-12;
      sol = std::move(next);
      if (settled) break;
    }
  }
  sol.c = backward_coefficients(sol.sigma_star, sol.depth, mode, params);
  return sol;
}

/// Largest residual of the recurrence lines p = 1..depth-1 for the
/// solution's coefficients, relative to the largest term in any line.
inline double recursion_residual(const EigenSolution& sol) {
  const RecurrenceTable t(sol.mode, sol.params, sol.depth);
  const auto& c = sol.c;
  double worst = 0.0, scale = 0.0;
  for (int p = 1; p < sol.depth; ++p) {
    const double sp = sol.sigma_star + t.offset[p - 1];
    const double a = sp * c[p - 1];
    const double b = c[p] / t.alpha[p];
    const double d = p >= 2 ? c[p - 2] / t.alpha[p - 2] : 0.0;
    scale = std::max({scale, std::fabs(a), std::fabs(b), std::fabs(d)});
    worst = std::max(worst, std::fabs(a + b + d));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

/// Coefficients with |c_p| above this are required to fit on a grid.
inline constexpr double kCoefficientCutoff = 1e-14;

/// The t = 0 eigenfunction sin(k1 x1) sin(k2 x2) sum_p c_p sin(m p x3) as a
/// spectral field. Throws TruncationError when a coefficient above
/// kCoefficientCutoff does not fit in the grid's retained band.
inline SpectralField assemble_eigenfunction(const EigenSolution& sol, const Grid& grid) {
  const auto k1 = sol.mode.k1;
  const auto k2 = sol.mode.k2;
  const std::int64_t m = sol.params.m;
  int p_last = 0;
  for (int p = 1; p <= static_cast<int>(sol.c.size()); ++p) {
    if (std::fabs(sol.c[p - 1]) > kCoefficientCutoff) p_last = p;
  }
  if (std::abs(k1) > grid.kmax1() || std::abs(k2) > grid.kmax2() || m * p_last > grid.kmax3()) {
    throw TruncationError("assemble_eigenfunction: mode (" + std::to_string(k1) + ", " +
                          std::to_string(k2) + ") with vertical harmonics up to " +
                          std::to_string(m * p_last) + " does not fit grid " + grid.str());
  }
  FieldBuilder b(grid);
  // sin a sin b sin c has coefficient i s1 s2 s3 / 8 at (s1 a, s2 b, s3 c).
  for (int p = 1; p <= p_last; ++p) {
    const double cp = sol.c[p - 1];
    for (int s1 : {1, -1}) {
      for (int s2 : {1, -1}) {
        const Wavevector k{s1 * k1, s2 * k2, m * p};
        b.add(k, std::complex<double>(0.0, s1 * s2 * cp / 8.0));
      }
    }
  }
  return b.build();
}

/// Eigenfunction rescaled to unit H^s seminorm.
inline SpectralField normalized_eigenfunction(const EigenSolution& sol, const Grid& grid, double s) {
  return normalize_hs(assemble_eigenfunction(sol, grid), s);
}

struct GrowthOptimum {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  double sigma_star = 0.0;
  double lower_bound_at_opt = 0.0;
  // integer maximiser of the closed-form lower bound over the same box
  std::int64_t lb_k1 = 0;
  std::int64_t lb_k2 = 0;
  double lb_max = 0.0;
  // continuum predictions
  double continuum_k1 = 0.0;       // 1 / (16 eps)
  double continuum_k2 = 0.0;       // N sqrt(m / (8 eps))
  double reference_growth = 0.0;   // 1 / (2^8 eps) - 8 m^2 eps
  std::int64_t unstable_count = 0;
};

/// 1/(2^8 eps_kappa) - 8 m^2 eps_kappa.
inline double reference_growth_bound(const PhysParams& params) {
  const double e = params.eps_kappa;
  const double m = params.m;
  return 1.0 / (256.0 * e) - 8.0 * m * m * e;
}

/// Exhaustive search of (k1, k2) in [1, box]^2 for the largest sigma_*.
/// Requires eps_kappa > 0 and gamma = 1. Throws EmptyResult when every mode in
/// the box is stable.
inline GrowthOptimum optimize_growth(const PhysParams& params, int box) {
  params.validate();
  if (!(params.eps_kappa > 0.0) || params.gamma != 1.0) {
    throw InvalidArgument("optimize_growth: requires eps_kappa > 0 and gamma = 1");
  }
  if (box < 1) throw InvalidArgument("optimize_growth: box must be >= 1");
  GrowthOptimum best;
  best.lb_max = -std::numeric_limits<double>::infinity();
  best.sigma_star = -std::numeric_limits<double>::infinity();
  for (std::int64_t k1 = 1; k1 <= box; ++k1) {
    for (std::int64_t k2 = 1; k2 <= box; ++k2) {
      const ModePair mode{k1, k2};
      const EigenBounds bnd = bounds_check(mode, params);
      if (bnd.lower > best.lb_max) {
        best.lb_max = bnd.lower;
        best.lb_k1 = k1;
        best.lb_k2 = k2;
      }
      try {
        const EigenSolution sol = solve_sigma_star(mode, params);
        ++best.unstable_count;
        if (sol.sigma_star > best.sigma_star) {
          best.sigma_star = sol.sigma_star;
          best.k1 = k1;
          best.k2 = k2;
          best.lower_bound_at_opt = bnd.lower;
        }
      } catch (const NoRoot&) {
      }
    }
  }
  if (best.unstable_count == 0) {
    throw EmptyResult("optimize_growth: no unstable modes in box " + std::to_string(box));
  }
  best.continuum_k1 = 1.0 / (16.0 * params.eps_kappa);
  best.continuum_k2 = std::sqrt(params.n2) * std::sqrt(params.m / (8.0 * params.eps_kappa));
  best.reference_growth = reference_growth_bound(params);
  return best;
}

/// Families used to exhibit unbounded growth rates.
struct Regime {
  enum class Kind { nondiffusive, fractional };
  Kind kind = Kind::nondiffusive;
  double gamma = 1.0;

  static Regime nondiffusive() { return {Kind::nondiffusive, 1.0}; }
  static Regime fractional(double g) { return {Kind::fractional, g}; }

  std::string str() const {
    return kind == Kind::nondiffusive ? std::string("nondiffusive")
                                      : "fractional(" + std::to_string(gamma) + ")";
  }
};

struct SweepRow {
  std::int64_t j = 0;
  ModePair mode;
  bool has_root = false;
  double sigma_star = 0.0;
  double displayed_bound = 0.0;  // regime's closed-form lower bound at j
  bool bound_applies = false;    // j inside the range where the bound is asserted
  bool bound_ok = false;         // has_root && sigma_star >= displayed_bound (or bound not applicable)
  std::string note;
};

enum class SweepVerdict { diverging, terminating, inconclusive };

inline const char* to_string(SweepVerdict v) {
  switch (v) {
    case SweepVerdict::diverging: return "diverging";
    case SweepVerdict::terminating: return "terminating";
    default: return "inconclusive";
  }
}

struct SweepResult {
  Regime regime;
  PhysParams params;
  std::vector<SweepRow> rows;
  SweepVerdict verdict = SweepVerdict::inconclusive;
  /// Same classification applied to the displayed lower bounds instead of
  /// the computed eigenvalues.
  SweepVerdict bound_verdict = SweepVerdict::inconclusive;
  bool all_bounds_ok = true;
};

namespace detail {

inline double exact_integer(double v, const char* what) {
  const double r = std::round(v);
  if (std::fabs(v - r) > 1e-9 * std::max(1.0, std::fabs(v))) {
    throw InvalidArgument(std::string("illposedness_sweep: ") + what + " is not an integer");
  }
  return r;
}

inline SweepVerdict classify(const std::vector<double>& values, const std::vector<bool>& present) {
  const std::size_t n = values.size();
  if (n == 0) return SweepVerdict::inconclusive;
  if (!present.back()) return SweepVerdict::terminating;
  const std::size_t start = n / 2;
  for (std::size_t i = start; i < n; ++i) {
    if (!present[i]) return SweepVerdict::inconclusive;
    if (i > start && !(values[i] > values[i - 1])) return SweepVerdict::inconclusive;
  }
  return SweepVerdict::diverging;
}

}  // namespace detail

/// sigma_{*,j} along the regime's scaling family for j = j_min..j_max.
///
/// nondiffusive and fractional(gamma != 1/2): (k1, k2) = (j^2, j), bound
///   j^{2 gamma} (j^{1 - 2 gamma} m N^2 / (24 N^4 m^2 + 2) - 3 eps_kappa)  (gamma = 1/2 at eps = 0
///   reduces to j m N^2 / (24 N^4 m^2 + 2)), asserted for j >= 2m.
/// fractional(1/2): (k1, k2) = (j^2 / N^2, j sqrt(m)), which must be integers, bound
///   j^2 N^{-2} (1/26 - sqrt(3) eps_kappa), asserted for j >= max(N^4 m, 4m).
///
/// Per-j NoRoot failures are recorded in the table, not thrown.
inline SweepResult illposedness_sweep(std::int64_t j_min, std::int64_t j_max, const PhysParams& params,
                                      const Regime& regime) {
  if (j_min < 1 || j_max < j_min) throw InvalidArgument("illposedness_sweep: need 1 <= j_min <= j_max");
  PhysParams p = params;
  if (regime.kind == Regime::Kind::nondiffusive) {
    if (p.eps_kappa != 0.0) {
      throw InvalidArgument("illposedness_sweep: nondiffusive regime requires eps_kappa = 0");
    }
  } else {
    p.gamma = regime.gamma;
  }
  p.validate();

  SweepResult out;
  out.regime = regime;
  out.params = p;
  const double n2 = p.n2;
  const double m = p.m;
  const double c1_inv = m * n2 / (24.0 * n2 * n2 * m * m + 2.0);
  const bool threshold_family = regime.kind == Regime::Kind::fractional && regime.gamma == 0.5;

  std::vector<double> sig, bnd;
  std::vector<bool> has, bnd_pos;
  for (std::int64_t j = j_min; j <= j_max; ++j) {
    const double jd = static_cast<double>(j);
    SweepRow row;
    row.j = j;
    if (threshold_family) {
      row.mode = {static_cast<std::int64_t>(detail::exact_integer(jd * jd / n2, "j^2 / N^2")),
                  static_cast<std::int64_t>(detail::exact_integer(jd * std::sqrt(m), "j sqrt(m)"))};
      row.displayed_bound = jd * jd / n2 * (1.0 / 26.0 - std::sqrt(3.0) * p.eps_kappa);
      row.bound_applies = jd >= std::max(n2 * n2 * m, 4.0 * m);
    } else {
      row.mode = {j * j, j};
      if (regime.kind == Regime::Kind::nondiffusive) {
        row.displayed_bound = jd * c1_inv;
      } else {
        const double g = regime.gamma;
        row.displayed_bound =
            std::pow(jd, 2.0 * g) * (std::pow(jd, 1.0 - 2.0 * g) * c1_inv - 3.0 * p.eps_kappa);
      }
      row.bound_applies = jd >= 2.0 * m;
    }
    try {
      const EigenSolution sol = solve_sigma_star(row.mode, p);
      row.has_root = true;
      row.sigma_star = sol.sigma_star;
    } catch (const NoRoot& e) {
      row.note = e.what();
    }
    if (row.bound_applies && row.displayed_bound > 0.0) {
      row.bound_ok = row.has_root && row.sigma_star >= row.displayed_bound;
    } else {
      row.bound_ok = true;
    }
    out.all_bounds_ok = out.all_bounds_ok && row.bound_ok;
    sig.push_back(row.sigma_star);
    has.push_back(row.has_root);
    bnd.push_back(row.displayed_bound);
    bnd_pos.push_back(row.displayed_bound > 0.0);
    out.rows.push_back(row);
  }
  out.verdict = detail::classify(sig, has);
  out.bound_verdict = detail::classify(bnd, bnd_pos);
  return out;
}

}  // namespace mg
