#include <gtest/gtest.h>

#include <cmath>

#include "mg/symbol.hpp"

namespace {

using mg::Coriolis;
using mg::PhysParams;
using mg::Wavevector;

PhysParams with_n2(double n2) {
  PhysParams p;
  p.n2 = n2;
  return p;
}

TEST(Symbol, UnitModeValues) {
  const auto s = mg::eval_symbol({1, 1, 1}, with_n2(1.0));
  EXPECT_DOUBLE_EQ(s.m1, 0.5);
  EXPECT_DOUBLE_EQ(s.m2, -1.0);
  EXPECT_DOUBLE_EQ(s.m3, 0.5);
  EXPECT_DOUBLE_EQ(mg::eval_denominator({1, 1, 1}, with_n2(1.0)), 4.0);
  EXPECT_DOUBLE_EQ(s.dot({1, 1, 1}), 0.0);
}

TEST(Symbol, Denominator) {
  EXPECT_EQ(mg::eval_denominator({7, 0, 0}, with_n2(1.0)), 0.0);
  EXPECT_EQ(mg::eval_denominator({0, 2, 0}, with_n2(1.0)), 16.0);
}

TEST(Symbol, ZeroOnHorizontalSlab) {
  for (double n2 : {0.25, 1.0, 4.0}) {
    const auto s = mg::eval_symbol({5, -3, 0}, with_n2(n2));
    EXPECT_EQ(s.m1, 0.0);
    EXPECT_EQ(s.m2, 0.0);
    EXPECT_EQ(s.m3, 0.0);
  }
  EXPECT_EQ(mg::eval_symbol({0, 0, 0}, with_n2(1.0)).abs(), 0.0);
}

TEST(Symbol, DivergenceFreeAndEven) {
  for (double n2 : {0.25, 1.0, 4.0}) {
    const auto p = with_n2(n2);
    for (int a = -12; a <= 12; ++a) {
      for (int b = -12; b <= 12; ++b) {
        for (int c = -12; c <= 12; ++c) {
          const Wavevector k{a, b, c};
          const auto s = mg::eval_symbol(k, p);
          const double scale = std::sqrt(static_cast<double>(k.norm_sq())) * (s.abs() + 1.0);
          EXPECT_LE(std::fabs(s.dot(k)), 1e-14 * scale);
          const auto t = mg::eval_symbol(-k, p);
          EXPECT_EQ(s.m1, t.m1);
          EXPECT_EQ(s.m2, t.m2);
          EXPECT_EQ(s.m3, t.m3);
        }
      }
    }
  }
}

TEST(Symbol, M3EvenInEachComponent) {
  const auto p = with_n2(2.0);
  const auto s = mg::eval_symbol({3, 2, 5}, p);
  for (const Wavevector k : {Wavevector{-3, 2, 5}, Wavevector{3, -2, 5}, Wavevector{3, 2, -5}}) {
    EXPECT_EQ(mg::eval_symbol(k, p).m3, s.m3);
  }
}

TEST(BalanceOracle, MatchesSymbol) {
  for (const Wavevector k : {Wavevector{1, 1, 1}, Wavevector{2, 3, 1}, Wavevector{-4, 7, -2}}) {
    const auto s = mg::eval_symbol(k, with_n2(1.0));
    const auto o = mg::balance_oracle(k, with_n2(1.0));
    EXPECT_NEAR(o.m1, s.m1, 1e-12);
    EXPECT_NEAR(o.m2, s.m2, 1e-12);
    EXPECT_NEAR(o.m3, s.m3, 1e-12);
  }
}

TEST(BalanceOracle, RealVelocity) {
  const auto sol = mg::solve_balance({0, 1, 1}, with_n2(4.0), Coriolis::u_cross_e3);
  EXPECT_LT(sol.max_imag_u, 1e-14);
}

TEST(BalanceOracle, OppositeOrientationFlipsHorizontalN4Term) {
  const Wavevector k{2, 3, 1};
  const auto p = with_n2(2.0);
  const auto o = mg::balance_oracle(k, p, Coriolis::e3_cross_u);
  const double n2 = p.n2, n4 = n2 * n2;
  const double k1 = 2, k2 = 3, k3 = 1, ksq = 14;
  const double d = mg::eval_denominator(k, p);
  EXPECT_NEAR(o.m1, (-n4 * k2 * k3 * ksq - n2 * k1 * k2 * k2 * k3) / d, 1e-12);
  EXPECT_NEAR(o.m2, (n4 * k1 * k3 * ksq - n2 * k2 * k2 * k2 * k3) / d, 1e-12);
  EXPECT_NEAR(o.m3, mg::eval_symbol(k, p).m3, 1e-12);
}

TEST(BalanceOracle, RejectsSlab) {
  EXPECT_THROW(mg::balance_oracle({1, 2, 0}, with_n2(1.0)), mg::InvalidArgument);
}

TEST(PlaneBound, FiniteAndPlateaus) {
  const auto p = with_n2(1.0);
  const double b4 = mg::plane_bound_scan(1, 1, 4, p);
  const double b8 = mg::plane_bound_scan(1, 1, 8, p);
  EXPECT_GT(b4, 0.0);
  EXPECT_LT(b8 / b4, 2.0);
  const double plateau = mg::plane_bound_plateau(1, 1, p);
  EXPECT_TRUE(std::isfinite(plateau));
  EXPECT_LE(plateau, 2.0 + 1e-12);
  EXPECT_THROW(mg::plane_bound_scan(0, 1, 4, p), mg::InvalidPlane);
}

TEST(PlaneBound, DiagonalLimitOfM3) {
  const auto p = with_n2(1.0);
  const double j = 1000.0;
  const auto s = mg::eval_symbol({1000, 1000, 1}, p);
  EXPECT_NEAR(s.m3, 2.0 * std::pow(j, 4) / (std::pow(j, 4) + 2 * j * j + 1), 1e-12);
  EXPECT_NEAR(s.m3, 2.0, 1e-5);
}

TEST(GrowthScan, LinearAndSharp) {
  const auto scan = mg::growth_scan(200, with_n2(1.0));
  EXPECT_GT(scan.rows.front().ratio, 0.1);
  EXPECT_GT(scan.min_ratio, 0.1);
  EXPECT_LT(scan.max_ratio, 1.0);
  const auto& last = scan.rows.back();
  const auto s = mg::eval_symbol({last.j * last.j, last.j, 1}, with_n2(1.0));
  EXPECT_NEAR(s.m3 / last.k_norm, 0.5, 1e-3);
  for (double n2 : {0.25, 4.0}) {
    const auto other = mg::growth_scan(200, with_n2(n2));
    EXPECT_GT(other.min_ratio, 0.0);
    EXPECT_TRUE(std::isfinite(other.max_ratio));
  }
}

TEST(GrowthScan, VanishesWithoutK2) {
  for (int j = 1; j < 50; ++j) EXPECT_EQ(mg::eval_symbol({j, 0, 1}, with_n2(1.0)).m3, 0.0);
}

}  // namespace
