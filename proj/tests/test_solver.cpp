#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mg/eigenvalue.hpp"
#include "mg/solver.hpp"

namespace {

using mg::FieldBuilder;
using mg::Grid;
using mg::PhysParams;
using mg::SolverConfig;
using mg::SourceSpec;
using mg::SpectralField;

PhysParams make(double n2, double eps, double gamma, int m) {
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
  for (int k1 = -kcap; k1 <= kcap; ++k1)
    for (int k2 = -kcap; k2 <= kcap; ++k2)
      for (int k3 = 1; k3 <= kcap; ++k3) {
        const double decay = amp / (1.0 + k1 * k1 + k2 * k2 + k3 * k3);
        b.set({k1, k2, k3}, {decay * nd(rng), decay * nd(rng)});
      }
  return b.build();
}

TEST(Velocity, SteadyProfileHasNoVelocity) {
  const Grid g = Grid::make(16, 16, 16);
  const auto theta = FieldBuilder(g).add_sin({0, 0, 2}, 1.0).build();
  const auto u = mg::velocity_from_theta(theta, make(1, 0, 1, 2));
  for (const auto& c : u) EXPECT_EQ(c.nonzero_count(), 0u);
}

TEST(Velocity, CosineMode) {
  const Grid g = Grid::make(16, 16, 16);
  const auto theta = FieldBuilder(g).add_cos({1, 1, 1}, 1.0).build();
  const auto u = mg::velocity_from_theta(theta, make(1, 0, 1, 1));
  EXPECT_DOUBLE_EQ(u[0].coeff({1, 1, 1}).real(), 0.25);
  EXPECT_DOUBLE_EQ(u[1].coeff({1, 1, 1}).real(), -0.5);
  EXPECT_DOUBLE_EQ(u[2].coeff({1, 1, 1}).real(), 0.25);
  EXPECT_NEAR(mg::linf_norm(u[1]), 1.0, 1e-12);
}

TEST(Velocity, DivergenceFreeAndReal) {
  const Grid g = Grid::make(16, 16, 16);
  const auto theta = random_field(g, 1, 5, 1.0);
  const auto u = mg::velocity_from_theta(theta, make(2, 0, 1, 1));
  double worst = 0.0, scale = 0.0;
  for (int a = -5; a <= 5; ++a)
    for (int b = -5; b <= 5; ++b)
      for (int c = -5; c <= 5; ++c) {
        const std::complex<double> div =
            double(a) * u[0].coeff({a, b, c}) + double(b) * u[1].coeff({a, b, c}) + double(c) * u[2].coeff({a, b, c});
        worst = std::max(worst, std::abs(div));
        scale = std::max(scale, std::abs(theta.coeff({a, b, c})) * std::sqrt(double(a * a + b * b + c * c)));
      }
  EXPECT_LT(worst, 1e-14 * scale);
  for (const auto& c : u) EXPECT_EQ(c.hermitian_defect(), 0.0);
}

TEST(NonlinearRhs, SingleModeIsInviscidSteady) {
  const Grid g = Grid::make(16, 16, 16);
  const auto theta = FieldBuilder(g).add_cos({1, 2, 1}, 1.0).build();
  const auto r = mg::nonlinear_rhs(theta, make(1, 0, 1, 1));
  EXPECT_LT(mg::l2_norm(r), 1e-14);
}

TEST(NonlinearRhs, SteadyProfileWithBalanceSource) {
  const Grid g = Grid::make(16, 16, 16);
  for (double gamma : {0.3, 0.5, 1.0}) {
    const auto p = make(1, 0.05, gamma, 2);
    const auto theta = FieldBuilder(g).add_sin({0, 0, 2}, 1.0).build();
    const auto r = mg::nonlinear_rhs(theta, p, SourceSpec::steady_balance(2));
    EXPECT_EQ(mg::l2_norm(r), 0.0);
  }
  EXPECT_EQ(mg::l2_norm(mg::nonlinear_rhs(SpectralField(g), make(1, 0.1, 1, 1))), 0.0);
}

TEST(NonlinearRhs, EnergyNeutralAdvection) {
  const Grid g = Grid::make(24, 24, 24);
  const auto theta = random_field(g, 3, 7, 1.0);
  const auto r = mg::nonlinear_rhs(theta, make(1, 0, 1, 1));
  EXPECT_LT(std::fabs(mg::inner(theta, r)), 1e-14 * mg::mean_square(theta) * mg::l2_norm(r));
  EXPECT_TRUE(r.has_zero_vertical_mean());
  EXPECT_EQ(r.hermitian_defect(), 0.0);
}

TEST(NonlinearRhs, PreservesPlane) {
  const Grid g = Grid::make(32, 32, 32);
  const mg::PlaneSpec q(1, 1);
  const auto theta = mg::project_plane(random_field(g, 5, 10, 1.0), q);
  const auto r = mg::nonlinear_rhs(theta, make(1, 0.01, 0.3, 1));
  EXPECT_LT(mg::off_plane_energy(r, q), 1e-26 * mg::mean_square(r));
}

TEST(LinearizedRhs, ZeroAndPureDissipation) {
  const Grid g = Grid::make(16, 16, 16);
  const auto p = make(1, 0.1, 1, 1);
  EXPECT_EQ(mg::l2_norm(mg::linearized_rhs(SpectralField(g), p, 1)), 0.0);
  const auto theta = FieldBuilder(g).add_sin({3, 0, 2}, 1.0).build();
  const auto r = mg::linearized_rhs(theta, p, 1);
  EXPECT_LT(mg::l2_norm(r + theta.scaled(0.1 * 13)), 1e-15);
}

TEST(LinearizedRhs, EigenpairOnGrid) {
  const auto p = make(1, 0.01, 1, 1);
  const auto sol = mg::solve_sigma_star({1, 1}, p);
  const auto f = mg::assemble_eigenfunction(sol, Grid::make(32, 32, 32));
  const auto r = mg::linearized_rhs(f, p, 1);
  EXPECT_LT(mg::l2_norm(r - f.scaled(sol.sigma_star)) / mg::l2_norm(f), 1e-8);
}

TEST(Step, IntegratingFactorExactOnDissipation) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.1, 0.5, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.advect = false;
  const auto theta = FieldBuilder(g).add_cos({2, 1, 2}, 1.0).build();
  const auto next = mg::step(theta, cfg);
  const double factor = std::exp(-0.1 * 3.0 * 0.01);
  EXPECT_NEAR(next.coeff({2, 1, 2}).real(), 0.5 * factor, 1e-16);
}

TEST(Step, ImexEulerDecay) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.1, 1, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.scheme = mg::Scheme::imex_euler;
  cfg.advect = false;
  const auto theta = FieldBuilder(g).add_cos({1, 1, 1}, 1.0).build();
  const auto next = mg::step(theta, cfg);
  EXPECT_NEAR(next.coeff({1, 1, 1}).real(), 0.5 / (1.0 + 0.3 * 0.01), 1e-16);
}

TEST(Step, PreservesInvariants) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.01, 1, 1);
  cfg.grid = g;
  cfg.dt = 1e-3;
  const auto next = mg::step(random_field(g, 8, 5, 1.0), cfg);
  EXPECT_EQ(next.hermitian_defect(), 0.0);
  EXPECT_TRUE(next.has_zero_vertical_mean());
}

TEST(Run, ZeroStaysZero) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.01, 1, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 0.2;
  const auto res = mg::run(SpectralField(g), cfg);
  for (double v : res.diag.l2) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.final_state.nonzero_count(), 0u);
}

TEST(Run, UnforcedDissipativeEnergyDecreases) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.05, 1, 1);
  cfg.grid = g;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.record_every = 10;
  const auto res = mg::run(random_field(g, 2, 5, 0.3), cfg);
  ASSERT_EQ(res.diag.size(), 51u);
  for (std::size_t i = 1; i < res.diag.size(); ++i) {
    EXPECT_LT(res.diag.l2[i], res.diag.l2[i - 1]);
    EXPECT_LT(std::fabs(res.diag.energy_residual[i]), 1e-10);
  }
}

TEST(Run, LinearizedGrowthMatchesEigenvalue) {
  const auto p = make(1, 0.01, 1, 1);
  const auto sol = mg::solve_sigma_star({1, 1}, p);
  const Grid g = Grid::make(16, 16, 32);
  SolverConfig cfg;
  cfg.params = p;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 2.0;
  cfg.linearized = true;
  cfg.record_every = 10;
  const auto res = mg::run(mg::assemble_eigenfunction(sol, g), cfg);
  const auto fit = mg::growth_rate_fit(res.diag, 0.0, 2.0);
  EXPECT_NEAR(fit.rate, sol.sigma_star, 1e-8);
  EXPECT_GT(fit.r_squared, 0.9999);
}

TEST(Run, PureDissipationRate) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.02, 0.5, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.advect = false;
  const auto res = mg::run(FieldBuilder(g).add_cos({2, 2, 1}, 1.0).build(), cfg);
  const auto fit = mg::growth_rate_fit(res.diag, 0.0, 1.0);
  EXPECT_NEAR(fit.rate, -0.02 * 3.0, 1e-3 * 0.06);
}

TEST(Run, BlowUpIsReported) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.0, 1, 1);
  cfg.grid = g;
  cfg.dt = 2.0;
  cfg.t_end = 2000.0;
  cfg.linearized = true;
  cfg.enforce_ceiling = false;
  try {
    mg::run(random_field(g, 4, 5, 1.0), cfg);
    FAIL() << "expected BlowUp";
  } catch (const mg::BlowUp& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_FALSE(e.history().empty());
  }
}

TEST(Run, IllposednessCeiling) {
  const Grid g = Grid::make(32, 32, 32);
  SolverConfig cfg;
  cfg.params = make(1, 0.0, 1, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 1000.0;
  EXPECT_THROW(mg::run(SpectralField(g), cfg), mg::IllPosednessCeiling);
  EXPECT_TRUE(std::isinf(mg::illposedness_horizon(g, make(1, 0.01, 1, 1))));
  EXPECT_TRUE(std::isfinite(mg::illposedness_horizon(g, make(1, 0.01, 0.3, 1))));
}

TEST(Run, PlaneDiagnosticsAndPerturbation) {
  const Grid g = Grid::make(16, 16, 16);
  SolverConfig cfg;
  cfg.params = make(1, 0.01, 0.3, 1);
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 0.1;
  cfg.plane = mg::PlaneSpec(1, 1);
  const auto base = FieldBuilder(g).add_sin({0, 0, 1}, 1.0).build();
  cfg.reference = base;
  cfg.source = SourceSpec::steady_balance(1);
  const auto init = FieldBuilder(base).add_cos({1, 1, 1}, 1e-3).build();
  const auto res = mg::run(init, cfg);
  ASSERT_EQ(res.diag.off_plane.size(), res.diag.size());
  ASSERT_EQ(res.diag.perturbation_l2.size(), res.diag.size());
  for (double e : res.diag.off_plane) EXPECT_LT(e, 1e-30);
  EXPECT_NEAR(res.diag.perturbation_l2.front(), mg::l2_norm(init - base), 1e-15);
}

TEST(GrowthFit, DegenerateWindow) {
  mg::Diagnostics d;
  d.times = {0, 1, 2};
  d.l2 = {1, 2, 4};
  EXPECT_THROW(mg::growth_rate_fit(d, 0, 2), mg::DegenerateWindow);
  d.times.push_back(3);
  d.l2.push_back(8);
  const auto fit = mg::growth_rate_fit(d, 0, 3);
  EXPECT_NEAR(fit.rate, std::log(2.0), 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
}

}  // namespace
