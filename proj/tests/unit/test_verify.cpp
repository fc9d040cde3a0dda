#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "vdns/io.hpp"
#include "vdns/verify.hpp"

using namespace vdns;

TEST(Guermond, ClosedFormValues) {
  const ManufacturedCase c = guermond_case(1.0);
  EXPECT_DOUBLE_EQ(c.rho(Vec2(0.3, 0.7), 0.0), 2.3);
  EXPECT_LE((c.u(Vec2(0.3, 0.7), 0.0) - Vec2(-0.7, 0.3)).norm(), 1e-15);
  EXPECT_LE(c.u(Vec2(0.3, 0.7), std::numbers::pi / 2.0).norm(), 1e-15);
  for (double t : {0.0, 0.4, 1.0}) EXPECT_EQ(c.f(Vec2(0.0, 0.0), t).norm(), 0.0);
  EXPECT_EQ(c.p(Vec2(0.5, 0.5), 0.3), 0.0);
  // Hand derivative: d/dt rho + u . grad rho with s = sin t.
  const double t = 0.8, x = 0.2, y = 0.9, s = std::sin(t);
  const double drho_dt = std::cos(t) * (-x * std::sin(s) + y * std::cos(s));
  const Vec2 u = c.u(Vec2(x, y), t);
  EXPECT_NEAR(drho_dt + u.dot(Vec2(std::cos(s), std::sin(s))), 0.0, 1e-15);
}

TEST(Guermond, DensityStaysInRange) {
  const ManufacturedCase c = guermond_case(1.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = c.rho(Vec2(u(rng), u(rng)), u(rng));
    EXPECT_GE(r, 2.0);
    EXPECT_LE(r, 2.0 + std::sqrt(2.0));
  }
}

TEST(Guermond, ForcingMatchesThePdeResidual) {
  for (double mu : {1.0, 0.01}) {
    const PdeResidualSummary s = sample_pde_residual(guermond_case(mu), 200, 9);
    EXPECT_LE(s.momentum, 1e-5);
    EXPECT_LE(s.divergence, 1e-6);
    EXPECT_LE(s.transport, 1e-6);
  }
}

TEST(Guermond, BrokenForcingIsDetected) {
  ManufacturedCase c = guermond_case(1.0);
  c.f = [f = c.f](const Vec2& x, double t) -> Vec2 { return f(x, t) + Vec2(0.0, 1e-3); };
  EXPECT_GT(sample_pde_residual(c, 50, 9).momentum, 1e-4);
}

TEST(Guermond, RejectsNonpositiveViscosity) {
  EXPECT_THROW(guermond_case(0.0), std::invalid_argument);
  EXPECT_THROW(guermond_case(-1.0), std::invalid_argument);
  EXPECT_THROW(demo_problem("bump", 0.0), std::invalid_argument);
  EXPECT_THROW(demo_problem("nonexistent", 1.0), std::invalid_argument);
}

TEST(ErrorNorms, DensityErrorZeroOffsetAndHomogeneity) {
  const Mesh m = build_triangular(4);
  std::mt19937_64 rng(4);
  const std::vector<HybridVelocity> vel(3, random_divergence_free(m, rng));
  const std::vector<CellField> zero(3, CellField::constant(m, 0.0));
  EXPECT_EQ(density_error(m, zero, vel, 0.1), 0.0);
  // A constant offset has no jumps, so only the L2 part survives: |c| |Omega|^(1/2).
  const std::vector<CellField> offset(3, CellField::constant(m, -0.3));
  EXPECT_NEAR(density_error(m, offset, vel, 0.1), 0.3, 1e-14);
  std::vector<CellField> e;
  for (int i = 0; i < 3; ++i) e.push_back(random_cell_field(m, rng, -1.0, 1.0));
  std::vector<CellField> e2 = e;
  for (CellField& f : e2) {
    for (double& v : f.values) v *= -2.5;
  }
  EXPECT_NEAR(density_error(m, e2, vel, 0.1), 2.5 * density_error(m, e, vel, 0.1), 1e-13);
  EXPECT_THROW(density_error(m, e, std::span(vel).first(2), 0.1), std::invalid_argument);
}

TEST(ErrorNorms, VelocityErrorZeroAndHomogeneity) {
  const Mesh m = build_cartesian(3, 3);
  const LocalOperators ops(m);
  std::mt19937_64 rng(5);
  const std::vector<HybridVelocity> zero(4, HybridVelocity::zero(m));
  EXPECT_EQ(velocity_error(m, ops, zero, 0.1, 1.0, 1.0), 0.0);
  std::vector<HybridVelocity> e;
  for (int i = 0; i < 4; ++i) e.push_back(random_hybrid(m, rng));
  std::vector<HybridVelocity> e3;
  for (const HybridVelocity& v : e) e3.push_back(3.0 * v);
  EXPECT_NEAR(velocity_error(m, ops, e3, 0.1, 0.5, 2.0), 3.0 * velocity_error(m, ops, e, 0.1, 0.5, 2.0),
              1e-12);
  // Only the first entry nonzero: the dissipation sum skips n = 0.
  std::vector<HybridVelocity> first(4, HybridVelocity::zero(m));
  first[0] = e[0];
  EXPECT_NEAR(velocity_error(m, ops, first, 0.1, 1.0, 2.0), std::sqrt(2.0) * norm_0h(m, e[0]), 1e-13);
}

TEST(Eoc, WorkedExamples) {
  const double e1[] = {1.0, 0.5, 0.25};
  const double h1[] = {0.4, 0.2, 0.1};
  for (const auto& r : eoc(e1, h1)) EXPECT_NEAR(*r, 1.0, 1e-14);
  const double e2[] = {1.0, 0.5};
  const double h2[] = {1.0, 0.25};
  EXPECT_NEAR(*eoc(e2, h2)[0], 0.5, 1e-14);
  const double e3[] = {1.0, 0.0, 0.1};
  const auto r3 = eoc(e3, h1);
  EXPECT_FALSE(r3[0].has_value());
  EXPECT_FALSE(r3[1].has_value());
  const double one[] = {1.0};
  EXPECT_THROW(eoc(one, one), std::invalid_argument);
  const double up[] = {0.1, 0.2, 0.4};
  EXPECT_THROW(eoc(e1, up), std::invalid_argument);
}

TEST(Consistency, ZeroVelocityGivesZeroResiduals) {
  const Mesh m = build_triangular(4);
  std::mt19937_64 rng(6);
  const CellField rho = random_cell_field(m, rng, 1.0, 2.0);
  const HybridVelocity zero = HybridVelocity::zero(m);
  EXPECT_EQ(dh_consistency_residual(m, rho, zero, [](const Vec2& x) { return x.x() * x.y(); }), 0.0);
  EXPECT_EQ(ch_consistency_residual(m, rho, zero,
                                    [](const Vec2& x) -> Vec2 { return Vec2(x.y(), 1.0); }),
            0.0);
}

TEST(Consistency, ConstantDensityDhRateAtLeastOne) {
  // With rho constant, d_h vanishes on Z_h and int rho u . grad phi is O(h).
  std::vector<Mesh> levels;
  for (std::size_t n : {8u, 16u, 32u}) levels.push_back(build_triangular(n));
  const ConsistencyStudy s = consistency_rate_dh(
      levels, [](const Vec2&) { return 1.3; }, bubble_streamfunction(),
      [](const Vec2& x) { return std::sin(2.0 * x.x()) * (1.0 + x.y()); });
  ASSERT_EQ(s.rates.size(), 2u);
  for (const auto& r : s.rates) {
    ASSERT_TRUE(r.has_value());
    EXPECT_GE(*r, 0.9);
  }
}

TEST(RandomFields, DivergenceFreeAndHomogeneous) {
  const Mesh m = bundled_mesh("hexa_0");
  std::mt19937_64 rng(7);
  const HybridVelocity z = random_divergence_free(m, rng);
  EXPECT_TRUE(z.vanishes_on_boundary(m));
  for (double d : divergence(m, z).values) EXPECT_LE(std::abs(d), 1e-12);
  EXPECT_TRUE(random_hybrid(m, rng).vanishes_on_boundary(m));
  const CellField r = random_cell_field(m, rng, 2.0, 3.0);
  EXPECT_GE(r.min(), 2.0);
  EXPECT_LE(r.max(), 3.0);
}

TEST(NormEquivalence, RangeIsPositiveAndSampledSobolevBounded) {
  const Mesh m = build_triangular(4);
  const LocalOperators ops(m);
  const RatioRange r = ah_to_1h_range(m, ops);
  EXPECT_GT(r.min, 0.0);
  EXPECT_GE(r.max, r.min);
  const double s = sobolev_ratio_sampled(m, 4.0, 10, 3);
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 10.0);
}
