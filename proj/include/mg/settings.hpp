#pragma once

// Mapping from configuration text onto the library's parameter structs.
//
//   [physics]  n2, eps_kappa, gamma, m
//   [grid]     n1, n2, n3
//   [solver]   dt, t_end, scheme, linearized, record_every, advect, hs_order,
//              source (none | steady_balance | snapshot:PATH), plane, enforce_ceiling

#include <fstream>
#include <limits>
#include <string>

#include "mg/config.hpp"
#include "mg/params.hpp"
#include "mg/plane.hpp"
#include "mg/solver.hpp"
#include "mg/spectral_field.hpp"

namespace mg {

inline int checked_int(const Config& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError("config: key '" + key + "' out of range");
  }
  return static_cast<int>(v);
}

inline PhysParams params_from(const Config& cfg, const PhysParams& defaults = {1.0, 0.01, 1.0, 1}) {
  PhysParams p;
  p.n2 = cfg.get_double("physics.n2", defaults.n2);
  p.eps_kappa = cfg.get_double("physics.eps_kappa", defaults.eps_kappa);
  p.gamma = cfg.get_double("physics.gamma", defaults.gamma);
  p.m = checked_int(cfg, "physics.m", defaults.m);
  p.validate();
  return p;
}

inline Grid grid_from(const Config& cfg, int default_n = 32) {
  return Grid::make(checked_int(cfg, "grid.n1", default_n), checked_int(cfg, "grid.n2", default_n),
                    checked_int(cfg, "grid.n3", default_n));
}

inline SpectralField load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open snapshot '" + path + "'");
  return read_snapshot(in);
}

inline SourceSpec source_from(const std::string& text, int m) {
  if (text == "none") return SourceSpec::none();
  if (text == "steady_balance") return SourceSpec::steady_balance(m);
  if (text.rfind("snapshot:", 0) == 0) return SourceSpec::custom(load_snapshot(text.substr(9)));
  throw ParseError("config: unknown source '" + text + "' (none, steady_balance, snapshot:PATH)");
}

inline SolverConfig solver_from(const Config& cfg, const PhysParams& params, const Grid& grid) {
  SolverConfig sc;
  sc.params = params;
  sc.grid = grid;
  sc.dt = cfg.get_double("solver.dt", sc.dt);
  sc.t_end = cfg.get_double("solver.t_end", sc.t_end);
  sc.scheme = parse_scheme(cfg.get_string("solver.scheme", to_string(sc.scheme)));
  sc.linearized = cfg.get_bool("solver.linearized", sc.linearized);
  sc.record_every = checked_int(cfg, "solver.record_every", sc.record_every);
  sc.advect = cfg.get_bool("solver.advect", sc.advect);
  sc.hs_order = cfg.get_double("solver.hs_order", sc.hs_order);
  sc.source = source_from(cfg.get_string("solver.source", "none"), params.m);
  const std::string plane = cfg.get_string("solver.plane", "");
  if (!plane.empty()) sc.plane = PlaneSpec::parse(plane);
  sc.enforce_ceiling = cfg.get_bool("solver.enforce_ceiling", sc.enforce_ceiling);
  sc.validate();
  return sc;
}

}  // namespace mg
