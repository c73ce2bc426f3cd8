#pragma once

// Pseudo-spectral time integration of
//
//   d/dt theta + u . grad theta = -eps_kappa (-Laplacian)^gamma theta + S,   u = M[theta]
//
// and of its linearisation about sin(m x3),
//
//   d/dt theta = -m M3[theta] cos(m x3) - eps_kappa (-Laplacian)^gamma theta.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mg/eigenvalue.hpp"
#include "mg/error.hpp"
#include "mg/params.hpp"
#include "mg/plane.hpp"
#include "mg/spectral_field.hpp"
#include "mg/symbol.hpp"

namespace mg {

enum class Scheme { if_rk4, imex_euler };

inline const char* to_string(Scheme s) { return s == Scheme::if_rk4 ? "if_rk4" : "imex_euler"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "if_rk4") return Scheme::if_rk4;
  if (s == "imex_euler") return Scheme::imex_euler;
  throw InvalidArgument("unknown scheme '" + s + "' (expected if_rk4 or imex_euler)");
}

/// Forcing term S.
struct SourceSpec {
  enum class Kind { none, steady_balance, custom };
  Kind kind = Kind::none;
  int m = 1;                          // steady_balance only
  std::optional<SpectralField> field;  // custom only

  static SourceSpec none() { return {}; }
  /// S = eps_kappa m^(2 gamma) sin(m x3), which makes sin(m x3) a steady state.
  static SourceSpec steady_balance(int m) { return {Kind::steady_balance, m, std::nullopt}; }
  static SourceSpec custom(SpectralField f) { return {Kind::custom, 1, std::move(f)}; }

  std::string str() const {
    switch (kind) {
      case Kind::none: return "none";
      case Kind::steady_balance: return "steady_balance(" + std::to_string(m) + ")";
      default: return "custom";
    }
  }

  /// The source as a field on `grid`; throws if a custom source is not a
  /// valid real, zero-vertical-mean field on that grid.
  SpectralField build(const Grid& grid, const PhysParams& params) const {
    switch (kind) {
      case Kind::none:
        return SpectralField(grid);
      case Kind::steady_balance: {
        const double mm = static_cast<double>(m) * m;
        return FieldBuilder(grid).add_sin({0, 0, m}, params.dissipation_rate(mm)).build();
      }
      default:
        if (!field) throw InvalidArgument("SourceSpec: custom source without a field");
        field->check_same_grid(SpectralField(grid));
        if (field->hermitian_defect() != 0.0 || !field->has_zero_vertical_mean()) {
          throw InvalidArgument("SourceSpec: custom source must be Hermitian with zero vertical mean");
        }
        return *field;
    }
  }
};

struct SolverConfig {
  PhysParams params;
  Grid grid;
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::if_rk4;
  SourceSpec source;
  bool linearized = false;
  int record_every = 1;
  bool advect = true;        // nonlinear runs only; false drops u . grad theta
  double hs_order = 1.0;     // s of the recorded H^s seminorm
  std::optional<PlaneSpec> plane;
  std::optional<SpectralField> reference;  // records l2(theta - reference) when set
  bool enforce_ceiling = true;

  void validate() const {
    params.validate();
    grid.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("SolverConfig: dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
      throw InvalidArgument("SolverConfig: t_end must be positive");
    }
    if (record_every < 1) throw InvalidArgument("SolverConfig: record_every must be >= 1");
    if (reference) reference->check_same_grid(SpectralField(grid));
  }

  std::int64_t steps() const { return static_cast<std::int64_t>(std::llround(t_end / dt)); }
};

struct Diagnostics {
  std::vector<double> times;
  std::vector<double> l2;
  std::vector<double> linf;
  std::vector<double> hs;
  std::vector<double> off_plane;        // off_plane_energy, empty without a plane
  std::vector<double> energy_residual;  // relative L^2 balance defect of the last step
  std::vector<double> perturbation_l2;  // empty without a reference field

  std::size_t size() const { return times.size(); }
};

struct RunResult {
  Diagnostics diag;
  SpectralField final_state;
  std::vector<std::string> warnings;
};

/// Fourier-space operators for one grid and parameter set.
class MgOperator {
 public:
  MgOperator(const Grid& grid, const PhysParams& params)
      : grid_(grid), params_(params), transformer_(grid) {
    grid.validate();
    params.validate();
    const std::size_t n = grid.spectral_size();
    for (auto* t : {&m1_, &m2_, &m3_, &lambda_, &kx_, &ky_, &kz_}) t->assign(n, 0.0);
    retained_.assign(n, 0);
    for_each_stored(grid, [&](std::size_t idx, const Wavevector& k) {
      const SymbolValue s = eval_symbol(k, params);
      m1_[idx] = s.m1;
      m2_[idx] = s.m2;
      m3_[idx] = s.m3;
      lambda_[idx] = params.dissipation_rate(static_cast<double>(k.norm_sq()));
      kx_[idx] = static_cast<double>(k.k1);
      ky_[idx] = static_cast<double>(k.k2);
      kz_[idx] = static_cast<double>(k.k3);
      retained_[idx] = 1;
    });
    for (auto& b : real_) b.assign(grid.real_size(), 0.0);
    product_.assign(grid.real_size(), 0.0);
  }

  const Grid& grid() const { return grid_; }
  const PhysParams& params() const { return params_; }
  /// eps_kappa |k|^(2 gamma) per stored index.
  const std::vector<double>& dissipation() const { return lambda_; }
  const std::vector<char>& retained() const { return retained_; }

  std::array<SpectralField, 3> velocity(const SpectralField& theta) const {
    theta.check_same_grid(SpectralField(grid_));
    std::array<ComplexBuffer, 3> u;
    for (auto& b : u) b.assign(grid_.spectral_size(), {});
    const auto& th = theta.storage();
    for (std::size_t i = 0; i < th.size(); ++i) {
      if (!retained_[i]) continue;
      u[0][i] = m1_[i] * th[i];
      u[1][i] = m2_[i] * th[i];
      u[2][i] = m3_[i] * th[i];
    }
    return {SpectralField::from_storage(grid_, std::move(u[0])),
            SpectralField::from_storage(grid_, std::move(u[1])),
            SpectralField::from_storage(grid_, std::move(u[2]))};
  }

  /// out += -P(u . grad theta), P the band truncation plus removal of k3 = 0.
  void add_advection(const ComplexBuffer& th, ComplexBuffer& out) {
    const std::size_t n = th.size();
    std::array<ComplexBuffer, 6> spec;
    for (auto& b : spec) b.assign(n, {});
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!retained_[i]) continue;
      const auto t = th[i];
      spec[0][i] = m1_[i] * t;
      spec[1][i] = m2_[i] * t;
      spec[2][i] = m3_[i] * t;
      spec[3][i] = I * kx_[i] * t;
      spec[4][i] = I * ky_[i] * t;
      spec[5][i] = I * kz_[i] * t;
    }
    for (int j = 0; j < 6; ++j) transformer_.inverse_into(spec[j], real_[j]);
    for (std::size_t x = 0; x < product_.size(); ++x) {
      product_[x] = real_[0][x] * real_[3][x] + real_[1][x] * real_[4][x] + real_[2][x] * real_[5][x];
    }
    const SpectralField adv = transformer_.forward(product_);
    const auto& a = adv.storage();
    for (std::size_t i = 0; i < n; ++i) {
      if (retained_[i] && kz_[i] != 0.0) out[i] -= a[i];
    }
  }

  /// out += -m P(M3[theta] cos(m x3)), computed by shifting k3 by +-m.
  void add_coupling(const ComplexBuffer& th, int m, ComplexBuffer& out) const {
    auto w = [&](std::int64_t k1, std::int64_t k2, std::int64_t k3) -> std::complex<double> {
      const Wavevector q{k1, k2, k3};
      if (!grid_.retains(q)) return {};
      if (k3 < 0) {
        const std::size_t j = grid_.spectral_index(-q);
        return std::conj(m3_[j] * th[j]);
      }
      const std::size_t j = grid_.spectral_index(q);
      return m3_[j] * th[j];
    };
    const double mm = m;
    for_each_stored(grid_, [&](std::size_t idx, const Wavevector& k) {
      if (k.k3 == 0) return;
      out[idx] -= 0.5 * mm * (w(k.k1, k.k2, k.k3 - m) + w(k.k1, k.k2, k.k3 + m));
    });
  }

 private:
  Grid grid_;
  PhysParams params_;
  Transformer transformer_;
  std::vector<double> m1_, m2_, m3_, lambda_, kx_, ky_, kz_;
  std::vector<char> retained_;
  std::array<RealBuffer, 6> real_;
  RealBuffer product_;
};

/// u_j = M_j[theta], one field per component.
inline std::array<SpectralField, 3> velocity_from_theta(const SpectralField& theta,
                                                        const PhysParams& params) {
  return MgOperator(theta.grid(), params).velocity(theta);
}

namespace detail {

inline void add_scaled_dissipation(const MgOperator& op, const ComplexBuffer& th, ComplexBuffer& out) {
  const auto& lam = op.dissipation();
  for (std::size_t i = 0; i < th.size(); ++i) out[i] -= lam[i] * th[i];
}

}  // namespace detail

/// -P(u . grad theta) - eps_kappa |k|^(2 gamma) theta + S.
inline SpectralField nonlinear_rhs(const SpectralField& theta, const PhysParams& params,
                                   const SpectralField& source) {
  theta.check_same_grid(source);
  MgOperator op(theta.grid(), params);
  ComplexBuffer out = source.storage();
  op.add_advection(theta.storage(), out);
  detail::add_scaled_dissipation(op, theta.storage(), out);
  return SpectralField::from_storage(theta.grid(), std::move(out));
}

inline SpectralField nonlinear_rhs(const SpectralField& theta, const PhysParams& params,
                                   const SourceSpec& source = SourceSpec::none()) {
  return nonlinear_rhs(theta, params, source.build(theta.grid(), params));
}

/// -m P(M3[theta] cos(m x3)) - eps_kappa |k|^(2 gamma) theta.
inline SpectralField linearized_rhs(const SpectralField& theta, const PhysParams& params, int m) {
  if (m < 1) throw InvalidArgument("linearized_rhs: m must be >= 1");
  MgOperator op(theta.grid(), params);
  ComplexBuffer out(theta.grid().spectral_size());
  op.add_coupling(theta.storage(), m, out);
  detail::add_scaled_dissipation(op, theta.storage(), out);
  return SpectralField::from_storage(theta.grid(), std::move(out));
}

/// Sum of |c|^2 over the full lattice, i.e. the spatial mean of theta^2.
inline double buffer_mean_square(const Grid& g, const ComplexBuffer& c) {
  double s = 0.0;
  for_each_stored(g, [&](std::size_t idx, const Wavevector& k) {
    s += lattice_weight(k) * std::norm(c[idx]);
  });
  return s;
}

/// Re sum conj(a) b over the full lattice.
inline double buffer_inner(const Grid& g, const ComplexBuffer& a, const ComplexBuffer& b) {
  double s = 0.0;
  for_each_stored(g, [&](std::size_t idx, const Wavevector& k) {
    s += lattice_weight(k) * (std::conj(a[idx]) * b[idx]).real();
  });
  return s;
}

/// Largest j whose paraboloid mode (j^2, j, m) fits the grid's band, or 0.
inline std::int64_t resolvable_paraboloid_j(const Grid& grid, int m) {
  if (m > grid.kmax3()) return 0;
  std::int64_t j = 0;
  while ((j + 1) * (j + 1) <= grid.kmax1() && j + 1 <= grid.kmax2()) ++j;
  return j;
}

/// Time stepper bound to one configuration. Explicit terms are advection (or
/// the linear coupling) plus the source; dissipation is diagonal and treated
/// exactly (if_rk4) or implicitly (imex_euler).
class Stepper {
 public:
  explicit Stepper(const SolverConfig& cfg)
      : cfg_(cfg), op_(cfg.grid, cfg.params), source_(cfg.source.build(cfg.grid, cfg.params)) {
    cfg.validate();
    const auto& lam = op_.dissipation();
    const std::size_t n = lam.size();
    e_full_.resize(n);
    e_half_.resize(n);
    implicit_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      e_full_[i] = std::exp(-lam[i] * cfg.dt);
      e_half_[i] = std::exp(-lam[i] * cfg.dt * 0.5);
      implicit_[i] = 1.0 / (1.0 + lam[i] * cfg.dt);
    }
  }

  const SolverConfig& config() const { return cfg_; }
  MgOperator& op() { return op_; }
  const SpectralField& source() const { return source_; }

  /// Explicit part N(theta).
  void explicit_rhs(const ComplexBuffer& th, ComplexBuffer& out) {
    out = source_.storage();
    if (cfg_.linearized) {
      op_.add_coupling(th, cfg_.params.m, out);
    } else if (cfg_.advect) {
      op_.add_advection(th, out);
    }
  }

  /// Full right-hand side F(theta) = N(theta) - Lambda theta.
  void full_rhs(const ComplexBuffer& th, ComplexBuffer& out) {
    explicit_rhs(th, out);
    detail::add_scaled_dissipation(op_, th, out);
  }

  SpectralField full_rhs(const SpectralField& theta) {
    ComplexBuffer out;
    full_rhs(theta.storage(), out);
    return SpectralField::from_storage(cfg_.grid, std::move(out));
  }

  /// One step of size dt. `a` holds N(u) on entry when `have_a` is set.
  void advance(const ComplexBuffer& u, ComplexBuffer& next, const ComplexBuffer* a_in = nullptr) {
    const std::size_t n = u.size();
    const double dt = cfg_.dt;
    ComplexBuffer a_local;
    if (!a_in) {
      explicit_rhs(u, a_local);
      a_in = &a_local;
    }
    const ComplexBuffer& a = *a_in;
    next.resize(n);
    if (cfg_.scheme == Scheme::imex_euler) {
      for (std::size_t i = 0; i < n; ++i) next[i] = implicit_[i] * (u[i] + dt * a[i]);
      return;
    }
    ComplexBuffer stage(n), b, c, d;
    for (std::size_t i = 0; i < n; ++i) stage[i] = e_half_[i] * (u[i] + 0.5 * dt * a[i]);
    explicit_rhs(stage, b);
    for (std::size_t i = 0; i < n; ++i) stage[i] = e_half_[i] * u[i] + 0.5 * dt * b[i];
    explicit_rhs(stage, c);
    for (std::size_t i = 0; i < n; ++i) stage[i] = e_full_[i] * u[i] + dt * e_half_[i] * c[i];
    explicit_rhs(stage, d);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = e_full_[i] * u[i] +
                dt / 6.0 * (e_full_[i] * a[i] + 2.0 * e_half_[i] * (b[i] + c[i]) + d[i]);
    }
  }

  SpectralField step(const SpectralField& state) {
    state.check_same_grid(source_);
    ComplexBuffer next;
    advance(state.storage(), next);
    return SpectralField::from_storage(cfg_.grid, std::move(next));
  }

  /// Relative defect of the discrete balance d/dt |theta|^2 = 2 <theta, F(theta)>
  /// over one step u0 -> u1, with the time integral taken by Simpson's rule
  /// and the midpoint state by cubic Hermite interpolation.
  double energy_residual(const ComplexBuffer& u0, const ComplexBuffer& f0, const ComplexBuffer& u1,
                         const ComplexBuffer& f1) {
    const Grid& g = cfg_.grid;
    const double dt = cfg_.dt;
    const std::size_t n = u0.size();
    ComplexBuffer mid(n), fm;
    for (std::size_t i = 0; i < n; ++i) {
      mid[i] = 0.5 * (u0[i] + u1[i]) + dt / 8.0 * (f0[i] - f1[i]);
    }
    full_rhs(mid, fm);
    const double e0 = buffer_mean_square(g, u0);
    const double e1 = buffer_mean_square(g, u1);
    const double p0 = 2.0 * buffer_inner(g, u0, f0);
    const double pm = 2.0 * buffer_inner(g, mid, fm);
    const double p1 = 2.0 * buffer_inner(g, u1, f1);
    if (e0 == 0.0) return 0.0;
    return (e1 - e0 - dt / 6.0 * (p0 + 4.0 * pm + p1)) / (dt * e0);
  }

 private:
  SolverConfig cfg_;
  MgOperator op_;
  SpectralField source_;
  std::vector<double> e_full_, e_half_, implicit_;
};

/// Single step with a freshly built stepper.
inline SpectralField step(const SpectralField& state, const SolverConfig& cfg) {
  return Stepper(cfg).step(state);
}

/// Rough bound on the fastest explicit frequency of the configuration.
inline double advective_frequency(const SpectralField& theta, const SolverConfig& cfg) {
  const Grid& g = cfg.grid;
  if (cfg.linearized) {
    double worst = 0.0;
    for_each_stored(g, [&](std::size_t, const Wavevector& k) {
      worst = std::max(worst, std::fabs(eval_symbol(k, cfg.params).m3));
    });
    return cfg.params.m * worst;
  }
  if (!cfg.advect) return 0.0;
  const auto u = velocity_from_theta(theta, cfg.params);
  return linf_norm(u[0]) * g.kmax1() + linf_norm(u[1]) * g.kmax2() + linf_norm(u[2]) * g.kmax3();
}

inline constexpr double kCflLimit = 0.5;
inline constexpr double kBlowUpNorm = 1e150;
inline constexpr double kCeilingExponent = 30.0;

/// Largest time the ill-posed regimes (eps_kappa = 0 or gamma < 1/2) are
/// integrated for: the resolved paraboloid growth sigma_{*, j_max} t stays
/// below 30. Infinite for well-posed regimes.
inline double illposedness_horizon(const Grid& grid, const PhysParams& params) {
  if (!(params.nondiffusive() || params.gamma < 0.5)) return std::numeric_limits<double>::infinity();
  const std::int64_t j = resolvable_paraboloid_j(grid, params.m);
  if (j < 1) return std::numeric_limits<double>::infinity();
  try {
    const double s = solve_sigma_star({j * j, j}, params).sigma_star;
    return kCeilingExponent / s;
  } catch (const NoRoot&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Integrates from `initial` to t_end, recording diagnostics every
/// `record_every` steps (and at t = 0). Throws BlowUp on a non-finite state or
/// an L^2 norm above 1e150, and IllPosednessCeiling when t_end exceeds
/// illposedness_horizon.
inline RunResult run(const SpectralField& initial, const SolverConfig& cfg) {
  cfg.validate();
  initial.check_same_grid(SpectralField(cfg.grid));
  RunResult res{Diagnostics{}, initial, {}};
  if (cfg.enforce_ceiling) {
    const double horizon = illposedness_horizon(cfg.grid, cfg.params);
    if (cfg.t_end > horizon) {
      std::ostringstream os;
      os << "ill-posedness ceiling: t_end = " << cfg.t_end << " exceeds " << horizon
         << " (resolved growth exponent would pass " << kCeilingExponent << ")";
      throw IllPosednessCeiling(os.str(), horizon);
    }
  }
  const double freq = advective_frequency(initial, cfg);
  if (freq * cfg.dt > kCflLimit) {
    std::ostringstream os;
    os << "CFL advisory: dt * frequency = " << freq * cfg.dt << " > " << kCflLimit;
    res.warnings.push_back(os.str());
    std::cerr << "warning: " << os.str() << "\n";
  }

  Stepper stepper(cfg);
  const Grid& g = cfg.grid;
  Diagnostics& d = res.diag;
  const double vol_sqrt = std::sqrt(kTorusVolume);

  auto record = [&](double t, const SpectralField& f, double residual) {
    d.times.push_back(t);
    d.l2.push_back(l2_norm(f));
    d.linf.push_back(linf_norm(f));
    d.hs.push_back(hs_norm(f, cfg.hs_order));
    if (cfg.plane) d.off_plane.push_back(off_plane_energy(f, *cfg.plane));
    if (cfg.reference) d.perturbation_l2.push_back(l2_norm(f - *cfg.reference));
    d.energy_residual.push_back(residual);
  };

  ComplexBuffer u = initial.storage();
  ComplexBuffer a, next, f0, f1, a_next;
  record(0.0, initial, 0.0);
  const std::int64_t steps = cfg.steps();
  stepper.explicit_rhs(u, a);
  for (std::int64_t n = 1; n <= steps; ++n) {
    stepper.advance(u, next, &a);
    stepper.explicit_rhs(next, a_next);
    const double t = static_cast<double>(n) * cfg.dt;
    const double l2 = std::sqrt(buffer_mean_square(g, next)) * vol_sqrt;
    if (!std::isfinite(l2) || l2 > kBlowUpNorm) {
      std::ostringstream os;
      os << "blow-up at t = " << t << " (l2 = " << l2 << ")";
      throw BlowUp(os.str(), t, d.l2);
    }
    if (n % cfg.record_every == 0 || n == steps) {
      f0 = a;
      detail::add_scaled_dissipation(stepper.op(), u, f0);
      f1 = a_next;
      detail::add_scaled_dissipation(stepper.op(), next, f1);
      const double residual = stepper.energy_residual(u, f0, next, f1);
      record(t, SpectralField::from_storage(g, next), residual);
    }
    u.swap(next);
    a.swap(a_next);
  }
  res.final_state = SpectralField::from_storage(g, std::move(u));
  return res;
}

struct GrowthFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

enum class Series { l2, perturbation_l2 };

/// Least-squares slope of log(norm) against t over samples with t in [t_a, t_b].
inline GrowthFit growth_rate_fit(const Diagnostics& diag, double t_a, double t_b,
                                 Series series = Series::l2) {
  const auto& y = series == Series::l2 ? diag.l2 : diag.perturbation_l2;
  if (y.size() != diag.times.size()) {
    throw DegenerateWindow("growth_rate_fit: requested series was not recorded");
  }
  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = diag.times[i];
    if (t < t_a || t > t_b) continue;
    if (!(y[i] > 0.0)) throw DegenerateWindow("growth_rate_fit: nonpositive norm in window");
    ts.push_back(t);
    ls.push_back(std::log(y[i]));
  }
  if (ts.size() < 4) {
    throw DegenerateWindow("growth_rate_fit: fewer than 4 samples in [" + std::to_string(t_a) +
                           ", " + std::to_string(t_b) + "]");
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += ls[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
    sll += (ls[i] - ml) * (ls[i] - ml);
  }
  GrowthFit fit;
  fit.samples = ts.size();
  fit.rate = stl / stt;
  fit.r_squared = sll > 0.0 ? stl * stl / (stt * sll) : 1.0;
  return fit;
}

}  // namespace mg
