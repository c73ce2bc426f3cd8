// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion, exit 1 if any fails
//   acceptance --only N   run criterion N alone

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mg/eigenvalue.hpp"
#include "mg/experiments.hpp"
#include "mg/solver.hpp"
#include "mg/spectral_field.hpp"
#include "mg/symbol.hpp"
#include "oracles.hpp"

using namespace mg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

PhysParams phys(double n2, double eps, double gamma, int m) {
  PhysParams p;
  p.n2 = n2;
  p.eps_kappa = eps;
  p.gamma = gamma;
  p.m = m;
  return p;
}

SpectralField random_field(const Grid& g, unsigned seed, int kcap, double amp) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  FieldBuilder b(g);
  for (int k1 = -kcap; k1 <= kcap; ++k1) {
    for (int k2 = -kcap; k2 <= kcap; ++k2) {
      for (int k3 = 1; k3 <= kcap; ++k3) {
        const double decay = amp / (1.0 + k1 * k1 + k2 * k2 + k3 * k3);
        b.set({k1, k2, k3}, {decay * nd(rng), decay * nd(rng)});
      }
    }
  }
  return b.build();
}

// 1. Symbol oracle equivalence
Outcome criterion_1() {
  double worst = 0.0;
  std::size_t count = 0;
  for (double n2 : {0.25, 1.0, 4.0}) {
    const PhysParams p = phys(n2, 0.0, 1.0, 1);
    for (int k1 = -16; k1 <= 16; ++k1) {
      for (int k2 = -16; k2 <= 16; ++k2) {
        for (int k3 = -16; k3 <= 16; ++k3) {
          if (k3 == 0) continue;
          const Wavevector k{k1, k2, k3};
          const SymbolValue s = eval_symbol(k, p);
          const SymbolValue o = balance_oracle(k, p);
          for (int j = 0; j < 3; ++j) worst = std::max(worst, std::fabs(s[j] - o[j]));
          ++count;
        }
      }
    }
  }
  return {worst <= 1e-12, "max |M - oracle| = " + num(worst, 3) + " over " + std::to_string(count) +
                              " wavevectors (tol 1e-12)", {}};
}

// 2. Divergence-free and evenness
Outcome criterion_2() {
  double worst_div = 0.0, worst_scaled = 0.0;
  bool even = true;
  for (double n2 : {0.25, 1.0, 4.0}) {
    const PhysParams p = phys(n2, 0.0, 1.0, 1);
    for (int k1 = -32; k1 <= 32; ++k1) {
      for (int k2 = -32; k2 <= 32; ++k2) {
        for (int k3 = -32; k3 <= 32; ++k3) {
          const Wavevector k{k1, k2, k3};
          const SymbolValue s = eval_symbol(k, p);
          const SymbolValue r = eval_symbol(-k, p);
          even = even && s.m1 == r.m1 && s.m2 == r.m2 && s.m3 == r.m3;
          const double div = std::fabs(s.dot(k));
          const double terms = std::fabs(k1 * s.m1) + std::fabs(k2 * s.m2) + std::fabs(k3 * s.m3);
          worst_div = std::max(worst_div, div);
          if (terms > 0.0) worst_scaled = std::max(worst_scaled, div / terms);
        }
      }
    }
  }
  Outcome o;
  o.pass = even && worst_div <= 1e-14;
  o.detail = "max |k . M(k)| = " + num(worst_div, 3) + " (tol 1e-14), M(-k) == M(k) " +
             (even ? "exactly" : "VIOLATED");
  o.info.push_back("max |k . M| / sum |k_j M_j| = " + num(worst_scaled, 3) +
                   "; correctly rounded M already gives |k . M| = 2.8e-14 at N^2 = 4, k = (-32, 10, 1)");
  return o;
}

// 3. Eigenvalue bracket
Outcome criterion_3() {
  std::size_t tuples = 0, product_bad = 0, single_bad = 0;
  double worst_ratio = 0.0, least_ratio = INFINITY;
  std::string example;
  for (int k1 = 1; k1 <= 12; ++k1) {
    for (int k2 = 1; k2 <= 12; ++k2) {
      for (int m = 1; m <= 3; ++m) {
        for (double n2 : {0.5, 1.0, 2.0}) {
          for (double eps : {0.0, 0.01, 0.1}) {
            for (double gamma : {0.3, 0.5, 1.0}) {
              const PhysParams p = phys(n2, eps, gamma, m);
              const ModePair mode{k1, k2};
              const EigenBounds b = bounds_check(mode, p);
              if (!(b.lower > 0.0)) continue;
              ++tuples;
              const EigenSolution sol = solve_sigma_star(mode, p);
              const double ratio = sol.bracket_ratio();
              worst_ratio = std::max(worst_ratio, ratio);
              least_ratio = std::min(least_ratio, ratio);
              if (!sol.in_bracket()) {
                if (product_bad == 0) {
                  example = "(k1,k2,m,N2,eps,gamma) = (" + std::to_string(k1) + "," + std::to_string(k2) + "," +
                            std::to_string(m) + "," + num(n2) + "," + num(eps) + "," + num(gamma) +
                            ") sigma1 sigma2 alpha1 alpha2 = " + num(ratio, 8);
                }
                ++product_bad;
              }
              if (!(b.lower <= sol.sigma_star && sol.sigma_star <= b.upper)) ++single_bad;
            }
          }
        }
      }
    }
  }
  Outcome o;
  o.pass = tuples >= 200 && product_bad == 0 && single_bad == 0;
  o.detail = std::to_string(tuples) + " tuples with positive lower bound; product bracket 1 <= s1 s2 a1 a2 <= 2 " +
             "violated by " + std::to_string(product_bad) + ", single-sigma bounds violated by " +
             std::to_string(single_bad);
  o.info.push_back("s1 s2 a1 a2 ranges over [" + num(least_ratio, 8) + ", " + num(worst_ratio, 8) + "]");
  if (!example.empty()) o.info.push_back("first product-bracket violation: " + example);
  return o;
}

// 4. Dense-oracle equivalence
Outcome criterion_4() {
  std::mt19937 rng(20240601u);
  std::uniform_int_distribution<int> kd(1, 12), md(1, 3);
  std::uniform_real_distribution<double> n2d(0.25, 4.0), epsd(0.0, 0.1), gd(0.3, 1.0);
  constexpr int kDepth = 64;
  double worst = 0.0;
  int found = 0, draws = 0;
  while (found < 20 && draws < 10000) {
    ++draws;
    const int k1 = kd(rng), k2 = kd(rng), m = md(rng);
    const PhysParams p = phys(n2d(rng), epsd(rng), gd(rng), m);
    EigenSolution sol;
    try {
      sol = solve_sigma_star({k1, k2}, p, kDepth, false);
    } catch (const NoRoot&) {
      continue;
    }
    const double dense = oracle::dense_sigma_star(k1, k2, m, p.n2, p.eps_kappa, p.gamma, kDepth);
    worst = std::max(worst, std::fabs(sol.sigma_star - dense));
    ++found;
  }
  return {found == 20 && worst <= 1e-9,
          "max |sigma_* - dense| = " + num(worst, 3) + " over " + std::to_string(found) +
              " unstable random tuples at P = 64 (tol 1e-9)",
          {}};
}

// 5. Non-diffusive scaling
Outcome criterion_5() {
  const PhysParams p = phys(1.0, 0.0, 1.0, 1);
  bool above = true, increasing = true;
  double prev = -INFINITY, least_margin = INFINITY;
  for (int j = 2; j <= 20; ++j) {
    const double s = solve_sigma_star({static_cast<std::int64_t>(j) * j, j}, p).sigma_star;
    above = above && s >= j / 26.0;
    increasing = increasing && s > prev;
    least_margin = std::min(least_margin, s / (j / 26.0));
    prev = s;
  }
  return {above && increasing,
          std::string("sigma_*(j^2, j) >= j/26 for j = 2..20: ") + (above ? "yes" : "NO") +
              " (min ratio " + num(least_margin) + "), strictly increasing: " + (increasing ? "yes" : "NO"),
          {}};
}

// 6. Optimal growth
Outcome criterion_6() {
  Outcome o;
  o.pass = true;
  std::ostringstream detail;
  for (double eps : {0.01, 0.02, 0.05}) {
    const PhysParams p = phys(1.0, eps, 1.0, 1);
    detail << "eps " << eps << ": ";
    try {
      const GrowthOptimum g = optimize_growth(p, 64);
      const bool exceeds = g.sigma_star > g.lb_max;
      const bool near = std::fabs(g.k1 - g.continuum_k1) <= 2.0 && std::fabs(g.k2 - g.continuum_k2) <= 2.0;
      o.pass = o.pass && exceeds && near;
      detail << (exceeds && near ? "ok" : "FAIL") << "; ";
      o.info.push_back("eps " + num(eps) + ": argmax sigma_* (" + std::to_string(g.k1) + ", " +
                       std::to_string(g.k2) + ") sigma_* " + num(g.sigma_star) + " vs continuum (" +
                       num(g.continuum_k1) + ", " + num(g.continuum_k2) + "); lower-bound max " + num(g.lb_max) +
                       " at (" + std::to_string(g.lb_k1) + ", " + std::to_string(g.lb_k2) +
                       "); reference 1/(2^8 eps) - 8 m^2 eps = " + num(g.reference_growth) + "; " +
                       std::to_string(g.unstable_count) + " unstable modes in [1,64]^2");
    } catch (const EmptyResult&) {
      o.pass = false;
      detail << "FAIL (no unstable mode in [1,64]^2); ";
      o.info.push_back("eps " + num(eps) + ": every mode in [1,64]^2 is stable; reference 1/(2^8 eps) - 8 m^2 eps = " +
                       num(reference_growth_bound(p)));
    }
  }
  o.detail = detail.str();
  return o;
}

// 7. gamma = 1/2 threshold
Outcome criterion_7() {
  Outcome o;
  const PhysParams base = phys(1.0, 0.0, 0.5, 1);
  PhysParams lo = base, hi = base;
  lo.eps_kappa = 0.02;
  hi.eps_kappa = 0.1;
  const SweepResult a = illposedness_sweep(1, 40, lo, Regime::fractional(0.5));
  const SweepResult b = illposedness_sweep(1, 40, hi, Regime::fractional(0.5));
  o.pass = a.verdict == SweepVerdict::diverging && b.verdict == SweepVerdict::terminating;
  o.detail = std::string("sigma_* sweep j = 1..40: eps 0.02 ") + to_string(a.verdict) + ", eps 0.1 " +
             to_string(b.verdict) + " (required diverging / terminating)";
  const auto& la = a.rows.back();
  const auto& lb = b.rows.back();
  o.info.push_back("sigma_*/j^2 at j = 40: eps 0.02 " + num(la.sigma_star / 1600.0) + ", eps 0.1 " +
                   num(lb.sigma_star / 1600.0));
  o.info.push_back(std::string("displayed bound j^2 (1/26 - sqrt3 eps): eps 0.02 ") + to_string(a.bound_verdict) +
                   ", eps 0.1 " + to_string(b.bound_verdict) + "; bound holds wherever asserted: " +
                   (a.all_bounds_ok && b.all_bounds_ok ? "yes" : "NO"));
  return o;
}

// 8. Eigenpair dynamics
Outcome criterion_8() {
  const PhysParams p = phys(1.0, 0.01, 1.0, 1);
  const EigenSolution sol = solve_sigma_star({1, 1}, p);
  SolverConfig cfg;
  cfg.params = p;
  cfg.grid = Grid::make(32, 32, 32);
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.linearized = true;
  cfg.record_every = 10;
  const SpectralField phi = normalize_hs(assemble_eigenfunction(sol, cfg.grid), 0.0);
  const RunResult res = run(phi, cfg);
  const GrowthFit fit = growth_rate_fit(res.diag, 0.0, cfg.t_end);
  const double rel = std::fabs(fit.rate - sol.sigma_star) / sol.sigma_star;
  return {rel <= 0.01 && fit.r_squared > 0.9999,
          "fitted " + num(fit.rate, 10) + " vs sigma_* " + num(sol.sigma_star, 10) + ", rel err " + num(rel, 3) +
              " (tol 1e-2), r^2 = " + num(fit.r_squared, 12) + " (need > 0.9999)",
          {}};
}

// 9. Nonlinear instability
Outcome criterion_9() {
  InstabilitySettings s;
  s.params = phys(1.0, 0.01, 1.0, 1);
  s.grid = Grid::make(48, 48, 48);
  const InstabilityReport r = experiment_instability(s);
  if (r.stable) return {false, r.message, {}};
  Outcome o;
  o.pass = r.rel_error <= 0.05;
  o.detail = "eps 0.01, mode (" + std::to_string(r.optimum.k1) + ", " + std::to_string(r.optimum.k2) +
             "): perturbation rate " + num(r.rate_fitted, 8) + " vs sigma_* " + num(r.sigma_predicted, 8) +
             ", rel err " + num(r.rel_error, 3) + " (tol 5e-2)";
  o.info.push_back("fit window [0, " + num(r.window_end) + "], " + std::to_string(r.samples) + " samples, r^2 " +
                   num(r.r_squared, 10) + "; reference 1/(2^8 eps) - 8 m^2 eps = " + num(r.reference_value));
  return o;
}

// 10. Steady state
Outcome criterion_10() {
  Outcome o;
  o.pass = true;
  std::ostringstream detail;
  struct Case {
    double eps, gamma;
    int m;
  };
  for (const Case c : {Case{0.01, 1.0, 1}, Case{0.05, 0.5, 2}, Case{0.02, 0.3, 3}}) {
    SolverConfig cfg;
    cfg.params = phys(1.0, c.eps, c.gamma, c.m);
    cfg.grid = Grid::make(24, 24, 24);
    cfg.dt = 1e-2;
    cfg.t_end = 5.0;
    cfg.record_every = 50;
    cfg.source = SourceSpec::steady_balance(c.m);
    const SpectralField theta0 = steady_profile(cfg.grid, c.m);
    cfg.reference = theta0;
    const RunResult res = run(theta0, cfg);
    double rate = 0.0;
    for (std::size_t i = 1; i < res.diag.size(); ++i) {
      rate = std::max(rate, res.diag.perturbation_l2[i] / l2_norm(theta0) / res.diag.times[i]);
    }
    o.pass = o.pass && rate <= 1e-12;
    detail << "(eps " << c.eps << ", gamma " << c.gamma << ", m " << c.m << ") drift " << num(rate, 3) << "/time; ";
  }
  o.detail = detail.str() + "tol 1e-12 relative per unit time over t_end = 5";
  return o;
}

// 11. Discrete energy law
Outcome criterion_11() {
  Outcome o;
  o.pass = true;
  std::ostringstream detail;
  struct Case {
    double eps, gamma;
  };
  for (const Case c : {Case{0.05, 1.0}, Case{0.01, 0.5}, Case{0.02, 0.75}}) {
    SolverConfig cfg;
    cfg.params = phys(1.0, c.eps, c.gamma, 1);
    cfg.grid = Grid::make(24, 24, 24);
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    const SpectralField init = random_field(cfg.grid, 11, 5, 0.3);
    const RunResult res = run(init, cfg);
    double worst = 0.0;
    for (double r : res.diag.energy_residual) worst = std::max(worst, std::fabs(r));
    const bool exact = res.final_state.hermitian_defect() == 0.0 && res.final_state.has_zero_vertical_mean();
    o.pass = o.pass && worst < 1e-10 && exact;
    detail << "(eps " << c.eps << ", gamma " << c.gamma << ") residual " << num(worst, 3)
           << (exact ? "" : " symmetry LOST") << "; ";
    o.info.push_back("(eps " + num(c.eps) + ", gamma " + num(c.gamma) + ") dt * advective frequency = " +
                     num(advective_frequency(init, cfg) * cfg.dt, 3));
  }
  o.detail = detail.str() + "tol 1e-10 at dt = 1e-3, Hermitian and zero mean exact";
  return o;
}

// 12. Plane invariance
Outcome criterion_12() {
  PlaneDemoSettings s;
  s.params = phys(1.0, 0.01, 1.0, 1);
  s.grid = Grid::make(32, 32, 32);
  s.plane = PlaneSpec(1, 1);
  s.gammas = {0.3};
  s.control_gamma = 0.3;
  s.t_end = 5.0;
  const PlaneDemoReport r = experiment_plane_demo(s);
  const PlaneRun& plane = r.runs.at(0);
  const PlaneRun& control = r.runs.at(1);
  const double grow = control.rel_off_plane.back() / control.rel_off_plane.front();
  Outcome o;
  o.pass = plane.max_rel_off_plane < 1e-20 && grow > 1.0;
  o.detail = "gamma 0.3 on P_1 to t = 5: max relative off-plane energy " + num(plane.max_rel_off_plane, 3) +
             " (tol 1e-20); control off-plane energy grew by " + num(grow, 4) + "x";
  o.info.push_back("empirical C_q = " + num(r.c_q));
  return o;
}

// 13. Convergence order
Outcome criterion_13() {
  const PhysParams p = phys(1.0, 0.01, 1.0, 1);
  const EigenSolution sol = solve_sigma_star({1, 1}, p);
  const Grid g = Grid::make(16, 16, 32);
  const SpectralField phi = normalize_hs(assemble_eigenfunction(sol, g), 0.0);
  auto solve = [&](double dt) {
    SolverConfig cfg;
    cfg.params = p;
    cfg.grid = g;
    cfg.dt = dt;
    cfg.t_end = 4.0;
    cfg.linearized = true;
    cfg.record_every = static_cast<int>(cfg.steps());
    return run(phi, cfg).final_state;
  };
  const double coarse = 0.4;
  const SpectralField ref = solve(coarse / 64.0);
  const double scale = l2_norm(ref);
  const double e1 = l2_norm(solve(coarse) - ref) / scale;
  const double e2 = l2_norm(solve(coarse / 2.0) - ref) / scale;
  const double e3 = l2_norm(solve(coarse / 4.0) - ref) / scale;
  const double ratio = e1 / e2;
  Outcome o;
  o.pass = std::fabs(ratio - 16.0) <= 0.2 * 16.0;
  o.detail = "error ratio dt " + num(coarse) + " -> " + num(coarse / 2) + " = " + num(ratio, 5) +
             " (need 16 +/- 20%)";
  o.info.push_back("relative errors " + num(e1, 3) + ", " + num(e2, 3) + ", " + num(e3, 3) + "; next ratio " +
                   num(e2 / e3, 5));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 1;
    }
  }
  const std::vector<Criterion> all = {
      {1, "symbol oracle equivalence", 10.0, criterion_1},
      {2, "divergence-free and evenness", 0.0, criterion_2},
      {3, "eigenvalue bracket", 30.0, criterion_3},
      {4, "dense-oracle equivalence", 0.0, criterion_4},
      {5, "non-diffusive scaling", 0.0, criterion_5},
      {6, "optimal growth", 0.0, criterion_6},
      {7, "gamma = 1/2 threshold", 0.0, criterion_7},
      {8, "eigenpair dynamics", 60.0, criterion_8},
      {9, "nonlinear instability", 300.0, criterion_9},
      {10, "steady state", 0.0, criterion_10},
      {11, "discrete energy law", 0.0, criterion_11},
      {12, "plane invariance", 0.0, criterion_12},
      {13, "convergence order", 0.0, criterion_13},
  };
  if (only != 0 && (only < 1 || only > 13)) {
    std::cerr << "acceptance: no criterion " << only << "\n";
    return 1;
  }
  bool all_pass = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = num(secs, 3) + " s";
    if (c.time_limit > 0.0) {
      timing += " (limit " + num(c.time_limit) + " s)";
      if (secs > c.time_limit) o.pass = false;
    }
    std::cout << "criterion " << std::setw(2) << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.title
              << ": " << o.detail << " [" << timing << "]\n";
    for (const auto& line : o.info) std::cout << "    " << line << "\n";
    std::cout.flush();
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
