#pragma once

#include <Eigen/Core>
#include <fftw3.h>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mg/config.hpp"
#include "mg/eigenvalue.hpp"
#include "mg/experiments.hpp"
#include "mg/settings.hpp"
#include "mg/solver.hpp"
#include "mg/spectral_field.hpp"
#include "mg/symbol.hpp"

#ifndef MG_VERSION
#define MG_VERSION "0.0.0"
#endif

namespace mgcli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoUnstable = 2;

/// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::string out = ".";
};

/// Output location for one run: a directory for the manifest and default
/// artifacts, plus an optional explicit CSV path (`--out file.csv`).
struct Output {
  fs::path dir;
  std::optional<fs::path> csv;

  static Output resolve(const std::string& out) {
    Output o;
    const fs::path p(out);
    if (p.extension() == ".csv") {
      o.csv = p;
      o.dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    } else {
      o.dir = p;
    }
    fs::create_directories(o.dir);
    return o;
  }

  fs::path csv_or(const std::string& name) const { return csv ? *csv : dir / name; }
};

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mg::Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw mg::Error("write failed for '" + path.string() + "'");
}

inline std::string library_versions() {
  std::ostringstream os;
  os << "mg = " << MG_VERSION << "\n";
  os << "fftw = " << fftw_version << "\n";
  os << "eigen = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  os << "cli11 = " << CLI11_VERSION << "\n";
#if defined(__VERSION__)
  os << "compiler = " << __VERSION__ << "\n";
#endif
  return os.str();
}

/// Bookkeeping for one subcommand: config, artifacts, warnings, timing.
class Session {
 public:
  Session(std::string name, const Common& common, std::string command_line)
      : name_(std::move(name)), command_line_(std::move(command_line)), start_(std::chrono::steady_clock::now()) {
    config_path_ = common.config_path;
    if (!common.config_path.empty()) config_ = mg::Config::load(common.config_path);
    out_ = Output::resolve(common.out);
  }

  const mg::Config& config() const { return config_; }
  mg::Config& config() { return config_; }
  const Output& out() const { return out_; }

  void artifact(const fs::path& path, const std::string& text) {
    write_file(path, text);
    artifacts_.push_back(path.string());
  }

  void warn(const std::string& w) { warnings_.push_back(w); }

  void set_status(const std::string& s) { status_ = s; }

  void write_manifest() {
    for (const auto& k : config_.unused_keys()) warn("unused config key '" + k + "'");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ostringstream os;
    os << "# mg run manifest\n";
    os << "subcommand = " << name_ << "\n";
    os << "command = " << command_line_ << "\n";
    os << "config_path = " << config_path_ << "\n";
    os << "status = " << status_ << "\n";
    os << "wall_clock_seconds = " << secs << "\n";
    os << "\n[versions]\n" << library_versions();
    os << "\n# resolved configuration\n" << config_.resolved_text();
    os << "\n[artifacts]\n";
    for (const auto& a : artifacts_) os << a << "\n";
    if (!warnings_.empty()) {
      os << "\n[warnings]\n";
      for (const auto& w : warnings_) os << w << "\n";
    }
    write_file(out_.dir / "manifest.txt", os.str());
  }

 private:
  std::string name_;
  std::string command_line_;
  std::string config_path_;
  std::chrono::steady_clock::time_point start_;
  mg::Config config_;
  Output out_;
  std::vector<std::string> artifacts_;
  std::vector<std::string> warnings_;
  std::string status_ = "ok";
};

// ---------------------------------------------------------------------------
// subcommands

struct SymbolScanArgs {
  std::optional<double> n2;
  std::optional<long long> kmax;
  std::string plane;
};

inline int cmd_symbol_scan(Session& s, const SymbolScanArgs& a, std::ostream& out) {
  mg::Config& cfg = s.config();
  if (a.n2) cfg.set("physics.n2", mg::fmt(*a.n2));
  if (a.kmax) cfg.set("symbol_scan.kmax", std::to_string(*a.kmax));
  if (!a.plane.empty()) cfg.set("symbol_scan.plane", a.plane);
  mg::PhysParams p;
  p.n2 = cfg.get_double("physics.n2", 1.0);
  p.validate();
  const long long kmax = cfg.get_int("symbol_scan.kmax", 8);
  if (kmax < 1) throw mg::InvalidArgument("symbol-scan: kmax must be >= 1");
  const std::string plane_text = cfg.get_string("symbol_scan.plane", "");
  std::optional<mg::PlaneSpec> plane;
  if (!plane_text.empty()) plane = mg::PlaneSpec::parse(plane_text);

  std::ostringstream csv;
  csv << "k1,k2,k3,m1,m2,m3,abs,ratio_abs_over_k\n";
  double sup = 0.0;
  std::size_t rows = 0;
  for (long long k1 = -kmax; k1 <= kmax; ++k1) {
    for (long long k2 = -kmax; k2 <= kmax; ++k2) {
      for (long long k3 = -kmax; k3 <= kmax; ++k3) {
        const mg::Wavevector k{k1, k2, k3};
        if (k == mg::Wavevector{}) continue;
        if (plane && !plane->contains(k)) continue;
        const mg::SymbolValue v = mg::eval_symbol(k, p);
        const double abs = v.abs();
        sup = std::max(sup, abs);
        csv << k1 << ',' << k2 << ',' << k3 << ',' << mg::fmt(v.m1) << ',' << mg::fmt(v.m2) << ','
            << mg::fmt(v.m3) << ',' << mg::fmt(abs) << ','
            << mg::fmt(abs / std::sqrt(static_cast<double>(k.norm_sq()))) << '\n';
        ++rows;
      }
    }
  }
  const fs::path path = s.out().csv_or("symbol_scan.csv");
  s.artifact(path, csv.str());
  std::ostringstream sum;
  sum << "symbol scan N^2 = " << mg::fmt(p.n2) << ", |k_i| <= " << kmax << ", " << rows << " wavevectors\n";
  sum << "max |M| = " << mg::fmt(sup) << "\n";
  if (plane) {
    sum << "plane " << plane->str() << ": bound at kmax " << mg::fmt(mg::plane_bound_scan(plane->q_num(), plane->q_den(), kmax, p))
        << ", plateau C_q = " << mg::fmt(mg::plane_bound_plateau(plane->q_num(), plane->q_den(), p)) << "\n";
  }
  s.artifact(s.out().dir / "symbol_scan_summary.txt", sum.str());
  out << sum.str();
  return kExitOk;
}

struct EigenArgs {
  std::optional<long long> k1, k2, m, depth;
  std::optional<double> n2, eps_kappa, gamma;
  std::string sweep;
  std::optional<int> optimize;
};

inline std::string eigen_row(const mg::ModePair& mode, const mg::PhysParams& p,
                             const mg::EigenSolution* sol) {
  const mg::EigenBounds b = mg::bounds_check(mode, p);
  std::ostringstream os;
  os << mode.k1 << ',' << mode.k2 << ',' << mg::fmt(p.gamma) << ',' << mg::fmt(p.eps_kappa) << ','
     << (sol ? mg::fmt(sol->sigma_star) : std::string()) << ',' << mg::fmt(b.lower) << ',' << mg::fmt(b.upper)
     << ',' << (sol ? std::to_string(sol->depth) : std::string()) << ','
     << (sol ? mg::fmt(mg::recursion_residual(*sol)) : std::string()) << '\n';
  return os.str();
}

inline std::pair<long long, long long> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw mg::ParseError("--sweep expects j_min:j_max, got '" + text + "'");
  try {
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw mg::ParseError("--sweep expects j_min:j_max, got '" + text + "'");
  }
}

inline int cmd_eigen(Session& s, const EigenArgs& a, std::ostream& out) {
  mg::Config& cfg = s.config();
  if (a.n2) cfg.set("physics.n2", mg::fmt(*a.n2));
  if (a.eps_kappa) cfg.set("physics.eps_kappa", mg::fmt(*a.eps_kappa));
  if (a.gamma) cfg.set("physics.gamma", mg::fmt(*a.gamma));
  if (a.m) cfg.set("physics.m", std::to_string(*a.m));
  if (a.k1) cfg.set("eigen.k1", std::to_string(*a.k1));
  if (a.k2) cfg.set("eigen.k2", std::to_string(*a.k2));
  if (a.depth) cfg.set("eigen.depth", std::to_string(*a.depth));
  if (!a.sweep.empty()) cfg.set("eigen.sweep", a.sweep);
  if (a.optimize) cfg.set("eigen.optimize", std::to_string(*a.optimize));

  const mg::PhysParams p = mg::params_from(cfg);
  const int depth = mg::checked_int(cfg, "eigen.depth", mg::kDefaultDepth);
  const bool auto_depth = cfg.get_bool("eigen.auto_depth", true);
  const std::string sweep = cfg.get_string("eigen.sweep", "");
  const int box = mg::checked_int(cfg, "eigen.optimize", 0);

  std::ostringstream csv, sum;
  csv << "k1,k2,gamma,eps_kappa,sigma_star,lower_bound,upper_bound,depth,residual\n";
  int code = kExitOk;
  if (!sweep.empty()) {
    const auto [j_min, j_max] = parse_range(sweep);
    const mg::Regime regime =
        p.nondiffusive() ? mg::Regime::nondiffusive() : mg::Regime::fractional(p.gamma);
    const mg::SweepResult res = mg::illposedness_sweep(j_min, j_max, p, regime);
    std::size_t roots = 0;
    for (const auto& row : res.rows) {
      if (row.has_root) {
        const mg::EigenSolution sol = mg::solve_sigma_star(row.mode, p, depth, auto_depth);
        csv << eigen_row(row.mode, p, &sol);
        ++roots;
      } else {
        csv << eigen_row(row.mode, p, nullptr);
      }
    }
    sum << "sweep " << regime.str() << " j = " << j_min << ".." << j_max << ": " << roots
        << " unstable, verdict " << mg::to_string(res.verdict) << "\n";
    if (roots == 0) code = kExitNoUnstable;
  } else if (box > 0) {
    try {
      const mg::GrowthOptimum o = mg::optimize_growth(p, box);
      const mg::ModePair mode{o.k1, o.k2};
      const mg::EigenSolution sol = mg::solve_sigma_star(mode, p, depth, auto_depth);
      csv << eigen_row(mode, p, &sol);
      sum << "optimum over [1, " << box << "]^2: (k1, k2) = (" << o.k1 << ", " << o.k2
          << "), sigma_star = " << mg::fmt(o.sigma_star) << "\n";
      sum << "lower-bound maximiser (" << o.lb_k1 << ", " << o.lb_k2 << ") value " << mg::fmt(o.lb_max) << "\n";
      sum << "continuum optimum (" << mg::fmt(o.continuum_k1) << ", " << mg::fmt(o.continuum_k2)
          << "), reference 1/(2^8 eps_kappa) - 8 m^2 eps_kappa = " << mg::fmt(o.reference_growth) << "\n";
      sum << "unstable modes in box: " << o.unstable_count << "\n";
    } catch (const mg::EmptyResult&) {
      sum << "stable: no unstable modes in box\n";
      code = kExitNoUnstable;
    }
  } else {
    const mg::ModePair mode{cfg.get_int("eigen.k1", 1), cfg.get_int("eigen.k2", 1)};
    try {
      const mg::EigenSolution sol = mg::solve_sigma_star(mode, p, depth, auto_depth);
      csv << eigen_row(mode, p, &sol);
      sum << "sigma_star(" << mode.k1 << ", " << mode.k2 << ") = " << mg::fmt(sol.sigma_star) << " at depth "
          << sol.depth << ", recursion residual " << mg::fmt(mg::recursion_residual(sol)) << "\n";
    } catch (const mg::NoRoot& e) {
      csv << eigen_row(mode, p, nullptr);
      sum << "stable: no unstable modes (" << e.what() << ")\n";
      code = kExitNoUnstable;
    }
  }
  s.artifact(s.out().csv_or("eigen.csv"), csv.str());
  s.artifact(s.out().dir / "eigen_summary.txt", sum.str());
  out << sum.str();
  if (code == kExitNoUnstable) s.set_status("no unstable modes");
  return code;
}

struct EvolveArgs {
  std::string init;
  std::string plane;
  std::string out_diag;
  std::string out_field;
};

/// Initial condition from "eigenfunction", "snapshot:PATH" or
/// "mode:k1,k2,k3,amp". The eigenfunction uses [eigen] k1, k2 and is scaled to
/// L^2 norm [init] amplitude; [init] background adds sin(m x3).
inline mg::SpectralField build_initial(const mg::Config& cfg, const std::string& spec,
                                       const mg::SolverConfig& sc) {
  mg::SpectralField field(sc.grid);
  if (spec == "eigenfunction") {
    const mg::ModePair mode{cfg.get_int("eigen.k1", 1), cfg.get_int("eigen.k2", 1)};
    const mg::EigenSolution sol =
        mg::solve_sigma_star(mode, sc.params, mg::checked_int(cfg, "eigen.depth", mg::kDefaultDepth));
    const mg::SpectralField phi = mg::assemble_eigenfunction(sol, sc.grid);
    field = phi.scaled(cfg.get_double("init.amplitude", 1.0) / mg::l2_norm(phi));
  } else if (spec.rfind("snapshot:", 0) == 0) {
    field = mg::load_snapshot(spec.substr(9));
  } else if (spec.rfind("mode:", 0) == 0) {
    std::istringstream is(spec.substr(5));
    mg::Wavevector k;
    double amp = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(is >> k.k1 >> c1 >> k.k2 >> c2 >> k.k3 >> c3 >> amp) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw mg::ParseError("--init mode expects mode:k1,k2,k3,amp, got '" + spec + "'");
    }
    if (k.k3 == 0) throw mg::InvalidArgument("--init mode: k3 must be nonzero (zero vertical mean)");
    field = mg::FieldBuilder(sc.grid).add_cos(k, amp).build();
  } else {
    throw mg::ParseError("unknown --init '" + spec + "'");
  }
  if (cfg.get_bool("init.background", false)) field = field + mg::steady_profile(sc.grid, sc.params.m);
  return field;
}

inline int cmd_evolve(Session& s, const EvolveArgs& a, std::ostream& out) {
  mg::Config& cfg = s.config();
  if (!a.init.empty()) cfg.set("init.kind", a.init);
  if (!a.plane.empty()) cfg.set("solver.plane", a.plane);
  const mg::PhysParams p = mg::params_from(cfg);
  const mg::Grid g = mg::grid_from(cfg);
  const mg::SolverConfig sc = mg::solver_from(cfg, p, g);
  const mg::SpectralField init = build_initial(cfg, cfg.get_string("init.kind", "eigenfunction"), sc);
  const mg::RunResult res = mg::run(init, sc);
  for (const auto& w : res.warnings) s.warn(w);

  std::ostringstream diag, field, sum;
  mg::write_diag_csv(diag, res.diag);
  mg::write_snapshot(field, res.final_state);
  s.artifact(a.out_diag.empty() ? s.out().dir / "diag.csv" : fs::path(a.out_diag), diag.str());
  s.artifact(a.out_field.empty() ? s.out().dir / "final.mgfield" : fs::path(a.out_field), field.str());
  const auto& d = res.diag;
  sum << "evolve " << g.str() << " " << mg::to_string(sc.scheme) << " dt = " << mg::fmt(sc.dt) << " t_end = "
      << mg::fmt(sc.t_end) << (sc.linearized ? " (linearized)" : "") << "\n";
  sum << "l2: " << mg::fmt(d.l2.front()) << " -> " << mg::fmt(d.l2.back()) << "\n";
  double worst = 0.0;
  for (double r : d.energy_residual) worst = std::max(worst, std::fabs(r));
  sum << "max |energy residual| = " << mg::fmt(worst) << "\n";
  if (!d.off_plane.empty()) sum << "off-plane energy at end = " << mg::fmt(d.off_plane.back()) << "\n";
  if (d.size() >= 4) {
    try {
      const mg::GrowthFit fit = mg::growth_rate_fit(d, d.times.front(), d.times.back());
      sum << "fitted l2 growth rate = " << mg::fmt(fit.rate) << " (r^2 = " << mg::fmt(fit.r_squared) << ")\n";
    } catch (const mg::DegenerateWindow&) {
    }
  }
  s.artifact(s.out().dir / "evolve_summary.txt", sum.str());
  out << sum.str();
  return kExitOk;
}

inline int cmd_instability(Session& s, std::ostream& out) {
  const mg::InstabilityReport r = mg::experiment_instability(mg::InstabilitySettings::from(s.config()));
  for (const auto& w : r.warnings) s.warn(w);
  std::ostringstream csv, sum;
  mg::write_instability_csv(csv, r);
  mg::write_instability_summary(sum, r);
  s.artifact(s.out().dir / "instability.csv", csv.str());
  if (!r.stable) {
    std::ostringstream diag;
    mg::write_diag_csv(diag, r.diag);
    s.artifact(s.out().dir / "diag.csv", diag.str());
  }
  s.artifact(s.out().dir / "instability_summary.txt", sum.str());
  out << sum.str();
  if (r.stable) {
    s.set_status("no unstable modes");
    return kExitNoUnstable;
  }
  return kExitOk;
}

inline int cmd_illposedness(Session& s, std::ostream& out) {
  const mg::IllposednessReport r = mg::experiment_illposedness(mg::IllposednessSettings::from(s.config()));
  std::ostringstream csv, sum;
  mg::write_illposedness_csv(csv, r);
  mg::write_illposedness_summary(sum, r);
  s.artifact(s.out().dir / "illposedness.csv", csv.str());
  s.artifact(s.out().dir / "illposedness_summary.txt", sum.str());
  out << sum.str();
  return kExitOk;
}

inline int cmd_plane_demo(Session& s, std::ostream& out) {
  const mg::PlaneDemoReport r = mg::experiment_plane_demo(mg::PlaneDemoSettings::from(s.config()));
  for (const auto& pr : r.runs) {
    for (const auto& w : pr.warnings) s.warn(pr.label + ": " + w);
  }
  std::ostringstream csv, sum;
  mg::write_plane_demo_csv(csv, r);
  mg::write_plane_demo_summary(sum, r);
  s.artifact(s.out().dir / "plane_demo.csv", csv.str());
  s.artifact(s.out().dir / "plane_demo_summary.txt", sum.str());
  out << sum.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline std::string join_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

/// Entry point; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Magneto-geostrophic active scalar experiments", "mg"};
  app.set_version_flag("--version", std::string(MG_VERSION));
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "flat key = value configuration file");
    sub->add_option("--out", common.out, "output directory (or CSV path for symbol-scan and eigen)");
  };

  SymbolScanArgs scan;
  auto* c_scan = app.add_subcommand("symbol-scan", "tabulate the multiplier M(k)");
  add_common(c_scan);
  c_scan->add_option("--n2", scan.n2, "inverse Elsasser number N^2");
  c_scan->add_option("--kmax", scan.kmax, "scan |k_i| <= kmax");
  c_scan->add_option("--plane", scan.plane, "restrict to the plane k2 = q k1, q = num/den");

  EigenArgs eig;
  auto* c_eig = app.add_subcommand("eigen", "continued-fraction growth rate sigma_*");
  add_common(c_eig);
  c_eig->add_option("--k1", eig.k1);
  c_eig->add_option("--k2", eig.k2);
  c_eig->add_option("--m", eig.m);
  c_eig->add_option("--n2", eig.n2);
  c_eig->add_option("--eps-kappa", eig.eps_kappa);
  c_eig->add_option("--gamma", eig.gamma);
  c_eig->add_option("--depth", eig.depth, "initial truncation depth");
  c_eig->add_option("--sweep", eig.sweep, "j_min:j_max along (j^2, j)");
  c_eig->add_option("--optimize", eig.optimize, "search (k1, k2) in [1, box]^2");

  EvolveArgs evo;
  auto* c_evo = app.add_subcommand("evolve", "time integration");
  add_common(c_evo);
  c_evo->add_option("--init", evo.init, "eigenfunction | snapshot:PATH | mode:k1,k2,k3,amp");
  c_evo->add_option("--plane", evo.plane, "record off-plane energy for k2 = q k1");
  c_evo->add_option("--out-diag", evo.out_diag, "diagnostics CSV path");
  c_evo->add_option("--out-field", evo.out_field, "final state snapshot path");

  auto* c_inst = app.add_subcommand("instability", "nonlinear growth from the optimal eigenfunction");
  add_common(c_inst);
  auto* c_ill = app.add_subcommand("illposedness", "growth-rate sweeps along (j^2, j)");
  add_common(c_ill);
  auto* c_plane = app.add_subcommand("plane-demo", "plane-supported data versus off-plane control");
  add_common(c_plane);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    Session s(sub->get_name(), common, join_args(argc, argv));
    int code = kExitOk;
    try {
      if (sub == c_scan) {
        code = cmd_symbol_scan(s, scan, out);
      } else if (sub == c_eig) {
        code = cmd_eigen(s, eig, out);
      } else if (sub == c_evo) {
        code = cmd_evolve(s, evo, out);
      } else if (sub == c_inst) {
        code = cmd_instability(s, out);
      } else if (sub == c_ill) {
        code = cmd_illposedness(s, out);
      } else {
        code = cmd_plane_demo(s, out);
      }
    } catch (const std::exception& e) {
      s.set_status(std::string("error: ") + e.what());
      s.write_manifest();
      throw;
    }
    for (const auto& k : s.config().unused_keys()) err << "warning: unused config key '" << k << "'\n";
    s.write_manifest();
    return code;
  } catch (const std::exception& e) {
    err << "mg " << sub->get_name() << ": " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace mgcli
