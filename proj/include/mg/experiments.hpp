#pragma once

// Named experiments combining the eigenvalue and solver modules, with CSV and
// plain-text reporting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mg/config.hpp"
#include "mg/eigenvalue.hpp"
#include "mg/settings.hpp"
#include "mg/solver.hpp"
#include "mg/symbol.hpp"

namespace mg {

/// Writes v with 17 significant digits, so CSV output round-trips.
inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline SpectralField steady_profile(const Grid& grid, int m) {
  return FieldBuilder(grid).add_sin({0, 0, m}, 1.0).build();
}

/// diag.csv: t,l2,linf,hs,off_plane,energy_residual. off_plane is left empty
/// when no plane was configured.
inline void write_diag_csv(std::ostream& os, const Diagnostics& d) {
  os << "t,l2,linf,hs,off_plane,energy_residual\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << fmt(d.times[i]) << ',' << fmt(d.l2[i]) << ',' << fmt(d.linf[i]) << ',' << fmt(d.hs[i]) << ',';
    if (i < d.off_plane.size()) os << fmt(d.off_plane[i]);
    os << ',' << fmt(d.energy_residual[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// instability

struct InstabilitySettings {
  PhysParams params{1.0, 0.01, 1.0, 1};
  Grid grid{48, 48, 48};
  int box = 64;               // clipped to the grid's horizontal band
  double perturbation = 1e-6;  // eigenfunction L^2 norm relative to the steady profile
  double cutoff = 1e-2;        // end of the linear phase, same units
  double dt = 0.02;
  double t_end = 0.0;          // 0 picks a time just past the linear phase
  int record_every = 1;
  Scheme scheme = Scheme::if_rk4;

  static InstabilitySettings from(const Config& cfg) {
    InstabilitySettings s;
    s.params = params_from(cfg, s.params);
    s.grid = grid_from(cfg, 48);
    s.box = checked_int(cfg, "instability.box", s.box);
    s.perturbation = cfg.get_double("instability.perturbation", s.perturbation);
    s.cutoff = cfg.get_double("instability.cutoff", s.cutoff);
    s.dt = cfg.get_double("instability.dt", s.dt);
    s.t_end = cfg.get_double("instability.t_end", s.t_end);
    s.record_every = checked_int(cfg, "instability.record_every", s.record_every);
    s.scheme = parse_scheme(cfg.get_string("instability.scheme", to_string(s.scheme)));
    return s;
  }
};

struct InstabilityReport {
  bool stable = false;
  std::string message;
  int box_used = 0;
  GrowthOptimum optimum;
  double sigma_predicted = 0.0;
  double rate_fitted = 0.0;
  double r_squared = 0.0;
  double rel_error = 0.0;
  double eps_kappa = 0.0;
  double reference_value = 0.0;  // 1/(2^8 eps) - 8 m^2 eps
  double window_end = 0.0;
  std::size_t samples = 0;
  Diagnostics diag;
  std::vector<std::string> warnings;
};

/// Seeds the steady profile sin(m x3) with the fastest growing eigenfunction
/// in the box, integrates the nonlinear equation with the balancing source and
/// fits the growth rate of the perturbation over the linear phase.
inline InstabilityReport experiment_instability(const InstabilitySettings& s) {
  const PhysParams& p = s.params;
  p.validate();
  if (!(p.eps_kappa > 0.0) || p.gamma != 1.0) {
    throw InvalidArgument("instability: requires eps_kappa > 0 and gamma = 1");
  }
  if (!(s.perturbation > 0.0) || !(s.cutoff > s.perturbation)) {
    throw InvalidArgument("instability: need 0 < perturbation < cutoff");
  }
  InstabilityReport r;
  r.eps_kappa = p.eps_kappa;
  r.reference_value = reference_growth_bound(p);
  r.box_used = std::min({s.box, s.grid.kmax1(), s.grid.kmax2()});
  try {
    r.optimum = optimize_growth(p, r.box_used);
  } catch (const EmptyResult&) {
    r.stable = true;
    r.message = "stable: no unstable modes in box";
    return r;
  }
  const EigenSolution sol = solve_sigma_star({r.optimum.k1, r.optimum.k2}, p);
  r.sigma_predicted = sol.sigma_star;

  const SpectralField theta0 = steady_profile(s.grid, p.m);
  const SpectralField phi = assemble_eigenfunction(sol, s.grid);
  const double base = l2_norm(theta0);
  const SpectralField initial = theta0 + phi.scaled(s.perturbation * base / l2_norm(phi));

  SolverConfig sc;
  sc.params = p;
  sc.grid = s.grid;
  sc.dt = s.dt;
  sc.scheme = s.scheme;
  sc.source = SourceSpec::steady_balance(p.m);
  sc.record_every = s.record_every;
  sc.reference = theta0;
  sc.t_end = s.t_end > 0.0 ? s.t_end
                           : std::ceil(1.1 * std::log(s.cutoff / s.perturbation) / r.sigma_predicted / s.dt) *
                                 s.dt;
  RunResult run_result = run(initial, sc);
  r.diag = std::move(run_result.diag);
  r.warnings = std::move(run_result.warnings);

  const double limit = s.cutoff * base;
  r.window_end = 0.0;
  for (std::size_t i = 0; i < r.diag.size() && r.diag.perturbation_l2[i] < limit; ++i) {
    r.window_end = r.diag.times[i];
  }
  const GrowthFit fit = growth_rate_fit(r.diag, 0.0, r.window_end, Series::perturbation_l2);
  r.rate_fitted = fit.rate;
  r.r_squared = fit.r_squared;
  r.samples = fit.samples;
  r.rel_error = std::fabs(fit.rate - r.sigma_predicted) / r.sigma_predicted;
  r.message = "unstable";
  return r;
}

inline void write_instability_csv(std::ostream& os, const InstabilityReport& r) {
  os << "k1,k2,sigma_predicted,rate_fitted,rel_error,r_squared,eps_kappa,reference_value,"
        "lower_bound_max,lb_k1,lb_k2,continuum_k1,continuum_k2,unstable_count,box\n";
  if (r.stable) return;
  const GrowthOptimum& o = r.optimum;
  os << o.k1 << ',' << o.k2 << ',' << fmt(r.sigma_predicted) << ',' << fmt(r.rate_fitted) << ','
     << fmt(r.rel_error) << ',' << fmt(r.r_squared) << ',' << fmt(r.eps_kappa) << ','
     << fmt(r.reference_value) << ',' << fmt(o.lb_max) << ',' << o.lb_k1 << ',' << o.lb_k2 << ','
     << fmt(o.continuum_k1) << ',' << fmt(o.continuum_k2) << ',' << o.unstable_count << ',' << r.box_used
     << '\n';
}

inline void write_instability_summary(std::ostream& os, const InstabilityReport& r) {
  os << "instability experiment\n";
  os << "eps_kappa = " << fmt(r.eps_kappa) << "\n";
  os << "reference 1/(2^8 eps_kappa) - 8 m^2 eps_kappa = " << fmt(r.reference_value) << "\n";
  os << "box = [1, " << r.box_used << "]^2\n";
  if (r.stable) {
    os << r.message << "\n";
    return;
  }
  const GrowthOptimum& o = r.optimum;
  os << "optimal mode (k1, k2) = (" << o.k1 << ", " << o.k2 << ")\n";
  os << "continuum optimum (1/(16 eps), N sqrt(m/(8 eps))) = (" << fmt(o.continuum_k1) << ", "
     << fmt(o.continuum_k2) << ")\n";
  os << "sigma_star predicted = " << fmt(r.sigma_predicted) << "\n";
  os << "rate fitted = " << fmt(r.rate_fitted) << " (r^2 = " << fmt(r.r_squared) << ", " << r.samples
     << " samples on [0, " << fmt(r.window_end) << "])\n";
  os << "relative error = " << fmt(r.rel_error) << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// ill-posedness

struct IllposednessSettings {
  PhysParams params{1.0, 0.0, 1.0, 1};
  std::int64_t j_min = 1;
  std::int64_t j_max = 40;
  double eps_low = 0.02;   // gamma = 1/2 only: below the threshold
  double eps_high = 0.1;   // gamma = 1/2 only: above the threshold

  static IllposednessSettings from(const Config& cfg) {
    IllposednessSettings s;
    s.params = params_from(cfg, s.params);
    s.j_min = cfg.get_int("illposedness.j_min", s.j_min);
    s.j_max = cfg.get_int("illposedness.j_max", s.j_max);
    s.eps_low = cfg.get_double("illposedness.eps_low", s.eps_low);
    s.eps_high = cfg.get_double("illposedness.eps_high", s.eps_high);
    return s;
  }
};

struct IllposednessReport {
  std::vector<SweepResult> sweeps;
  double threshold = 1.0 / (26.0 * std::sqrt(3.0));
};

/// eps_kappa = 0 sweeps the nondiffusive family; gamma = 1/2 sweeps both
/// eps_low and eps_high; any other gamma sweeps the fractional family.
inline IllposednessReport experiment_illposedness(const IllposednessSettings& s) {
  s.params.validate();
  IllposednessReport r;
  if (s.params.nondiffusive()) {
    r.sweeps.push_back(illposedness_sweep(s.j_min, s.j_max, s.params, Regime::nondiffusive()));
  } else if (s.params.gamma == 0.5) {
    for (double e : {s.eps_low, s.eps_high}) {
      PhysParams p = s.params;
      p.eps_kappa = e;
      r.sweeps.push_back(illposedness_sweep(s.j_min, s.j_max, p, Regime::fractional(0.5)));
    }
  } else {
    r.sweeps.push_back(illposedness_sweep(s.j_min, s.j_max, s.params, Regime::fractional(s.params.gamma)));
  }
  return r;
}

inline void write_illposedness_csv(std::ostream& os, const IllposednessReport& r) {
  os << "regime,gamma,eps_kappa,j,k1,k2,has_root,sigma_star,displayed_bound,bound_applies,bound_ok\n";
  for (const auto& sw : r.sweeps) {
    for (const auto& row : sw.rows) {
      os << (sw.regime.kind == Regime::Kind::nondiffusive ? "nondiffusive" : "fractional") << ','
         << fmt(sw.params.gamma) << ',' << fmt(sw.params.eps_kappa) << ',' << row.j << ',' << row.mode.k1
         << ',' << row.mode.k2 << ',' << (row.has_root ? 1 : 0) << ','
         << (row.has_root ? fmt(row.sigma_star) : std::string()) << ',' << fmt(row.displayed_bound) << ','
         << (row.bound_applies ? 1 : 0) << ',' << (row.bound_ok ? 1 : 0) << '\n';
    }
  }
}

inline void write_illposedness_summary(std::ostream& os, const IllposednessReport& r) {
  os << "ill-posedness sweeps\n";
  os << "gamma = 1/2 threshold 1/(26 sqrt 3) = " << fmt(r.threshold) << "\n";
  for (const auto& sw : r.sweeps) {
    const auto& rows = sw.rows;
    os << (sw.regime.kind == Regime::Kind::nondiffusive ? std::string("nondiffusive")
                                                         : "fractional gamma = " + fmt(sw.params.gamma))
       << ", eps_kappa = " << fmt(sw.params.eps_kappa) << ", j = " << rows.front().j
       << ".." << rows.back().j << ": sigma_star sweep " << to_string(sw.verdict)
       << ", displayed bound " << to_string(sw.bound_verdict)
       << (sw.all_bounds_ok ? ", bound holds at every applicable j" : ", bound VIOLATED") << "\n";
  }
}

// ---------------------------------------------------------------------------
// plane demo

struct PlaneDemoSettings {
  PhysParams params{1.0, 0.01, 1.0, 1};
  Grid grid{32, 32, 32};
  PlaneSpec plane{1, 1};
  std::vector<double> gammas{0.3, 0.5, 0.8};
  double dt = 0.01;
  double t_end = 5.0;
  int record_every = 10;
  double amplitude = 0.1;   // size of the random plane perturbation of sin(m x3)
  int kcap = 3;             // its frequencies satisfy |k_i| <= kcap
  unsigned seed = 7;
  double control_gamma = 0.3;
  Wavevector control_mode{1, 2, 1};
  double control_amplitude = 1e-6;

  static PlaneDemoSettings from(const Config& cfg) {
    PlaneDemoSettings s;
    s.params = params_from(cfg, s.params);
    s.grid = grid_from(cfg, 32);
    s.plane = PlaneSpec::parse(cfg.get_string("plane_demo.plane", s.plane.str()));
    s.gammas = cfg.get_doubles("plane_demo.gammas", s.gammas);
    s.dt = cfg.get_double("plane_demo.dt", s.dt);
    s.t_end = cfg.get_double("plane_demo.t_end", s.t_end);
    s.record_every = checked_int(cfg, "plane_demo.record_every", s.record_every);
    s.amplitude = cfg.get_double("plane_demo.amplitude", s.amplitude);
    s.kcap = checked_int(cfg, "plane_demo.kcap", s.kcap);
    s.seed = static_cast<unsigned>(cfg.get_int("plane_demo.seed", s.seed));
    s.control_gamma = cfg.get_double("plane_demo.control_gamma", s.control_gamma);
    const std::string mode = cfg.get_string("plane_demo.control_mode", "1,2,1");
    std::istringstream is(mode);
    char c1 = 0, c2 = 0;
    if (!(is >> s.control_mode.k1 >> c1 >> s.control_mode.k2 >> c2 >> s.control_mode.k3) || c1 != ',' ||
        c2 != ',') {
      throw ParseError("config: plane_demo.control_mode expects k1,k2,k3");
    }
    s.control_amplitude = cfg.get_double("plane_demo.control_amplitude", s.control_amplitude);
    return s;
  }
};

struct PlaneRun {
  std::string label;
  double gamma = 0.0;
  bool control = false;
  Diagnostics diag;
  std::vector<double> rel_off_plane;  // off_plane / mean square, per record
  double max_rel_off_plane = 0.0;
  std::vector<std::string> warnings;
};

struct PlaneDemoReport {
  double c_q = 0.0;  // empirical plane bound of |M|
  double plane_data_rel_off_plane = 0.0;
  std::vector<PlaneRun> runs;
};

/// sin(m x3) plus a seeded random field supported on the plane.
inline SpectralField plane_data(const PlaneDemoSettings& s) {
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> nd;
  FieldBuilder b(steady_profile(s.grid, s.params.m));
  const int cap = s.kcap;
  for (int k1 = -cap; k1 <= cap; ++k1) {
    for (int k2 = -cap; k2 <= cap; ++k2) {
      for (int k3 = 1; k3 <= cap; ++k3) {
        const Wavevector k{k1, k2, k3};
        if (!s.plane.contains(k)) continue;
        const double a = s.amplitude / static_cast<double>(1 + k.norm_sq());
        b.add(k, {a * nd(rng), a * nd(rng)});
      }
    }
  }
  return b.build();
}

/// Plane-supported data and source evolved for each gamma, plus one control
/// run with an off-plane mode injected.
inline PlaneDemoReport experiment_plane_demo(const PlaneDemoSettings& s) {
  PlaneDemoReport r;
  r.c_q = plane_bound_plateau(s.plane.q_num(), s.plane.q_den(), s.params);
  const SpectralField data = plane_data(s);
  r.plane_data_rel_off_plane = off_plane_energy(data, s.plane) / mean_square(data);

  auto evolve = [&](const SpectralField& init, double gamma, bool control) {
    SolverConfig sc;
    sc.params = s.params;
    sc.params.gamma = gamma;
    sc.grid = s.grid;
    sc.dt = s.dt;
    sc.t_end = s.t_end;
    sc.record_every = s.record_every;
    sc.source = SourceSpec::steady_balance(s.params.m);
    sc.plane = s.plane;
    RunResult res = run(init, sc);
    PlaneRun pr;
    pr.gamma = gamma;
    pr.control = control;
    std::ostringstream label;
    label << (control ? "control" : "plane") << "_gamma_" << gamma;
    pr.label = label.str();
    pr.diag = std::move(res.diag);
    pr.warnings = std::move(res.warnings);
    const double vol = kTorusVolume;
    for (std::size_t i = 0; i < pr.diag.size(); ++i) {
      const double ms = pr.diag.l2[i] * pr.diag.l2[i] / vol;
      pr.rel_off_plane.push_back(pr.diag.off_plane[i] / ms);
      pr.max_rel_off_plane = std::max(pr.max_rel_off_plane, pr.rel_off_plane.back());
    }
    r.runs.push_back(std::move(pr));
  };

  for (double g : s.gammas) evolve(data, g, false);
  if (s.plane.contains(s.control_mode)) {
    throw InvalidArgument("plane_demo: control mode lies on the plane");
  }
  const SpectralField control = FieldBuilder(data).add_cos(s.control_mode, s.control_amplitude).build();
  evolve(control, s.control_gamma, true);
  return r;
}

inline void write_plane_demo_csv(std::ostream& os, const PlaneDemoReport& r) {
  os << "run,gamma,control,t,l2,linf,hs,off_plane,rel_off_plane\n";
  for (const auto& pr : r.runs) {
    for (std::size_t i = 0; i < pr.diag.size(); ++i) {
      os << pr.label << ',' << fmt(pr.gamma) << ',' << (pr.control ? 1 : 0) << ',' << fmt(pr.diag.times[i])
         << ',' << fmt(pr.diag.l2[i]) << ',' << fmt(pr.diag.linf[i]) << ',' << fmt(pr.diag.hs[i]) << ','
         << fmt(pr.diag.off_plane[i]) << ',' << fmt(pr.rel_off_plane[i]) << '\n';
    }
  }
}

inline void write_plane_demo_summary(std::ostream& os, const PlaneDemoReport& r) {
  os << "plane demo\n";
  os << "empirical plane bound C_q = " << fmt(r.c_q) << "\n";
  os << "initial relative off-plane energy = " << fmt(r.plane_data_rel_off_plane) << "\n";
  for (const auto& pr : r.runs) {
    os << pr.label << ": max relative off-plane energy " << fmt(pr.max_rel_off_plane) << ", first "
       << fmt(pr.rel_off_plane.front()) << ", last " << fmt(pr.rel_off_plane.back()) << ", final l2 "
       << fmt(pr.diag.l2.back()) << "\n";
    for (const auto& w : pr.warnings) os << "  warning: " << w << "\n";
  }
}

}  // namespace mg
