#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vdns/convection.hpp"
#include "vdns/io.hpp"
#include "vdns/operators.hpp"
#include "vdns/verify.hpp"

using namespace vdns;

namespace {

/// Term-by-term evaluation of c_h straight from its definition.
double c_h_oracle(const Mesh& m, const CellField& rho, const HybridVelocity& w,
                  const HybridVelocity& v, const HybridVelocity& z) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    for (std::size_t j = 0; j < m.n_cell_faces(c); ++j) {
      const std::size_t f = m.cell_faces(c)[j];
      const Vec2 n = m.outward_normal(c, j);
      const double wn = w.faces[f].dot(n);
      double rho_f = rho[c];
      if (wn < 0.0) {
        const std::size_t other = m.other_cell(f, c);
        rho_f = other == no_cell ? rho[c] : rho[other];
      }
      const double flux = m.face_measure(f) * rho_f * wn;
      s += 0.5 * flux * (v.faces[f].dot(z.cells[c]) - v.cells[c].dot(z.faces[f]));
    }
  }
  return s;
}

}  // namespace

TEST(Convection, UpwindTakesUpstreamCell) {
  const Mesh m = build_cartesian(2, 1);
  const std::size_t f = m.interior_faces()[0];
  CellField rho;
  rho.values = {1.0, 5.0};
  HybridVelocity w = HybridVelocity::zero(m);
  const std::size_t owner = m.face(f).owner;
  const std::size_t neighbor = m.face(f).neighbor;
  w.faces[f] = m.face_normal(f);
  EXPECT_EQ(upwind_trace(m, rho, w).density[f], rho[owner]);
  w.faces[f] = -m.face_normal(f);
  EXPECT_EQ(upwind_trace(m, rho, w).density[f], rho[neighbor]);
}

TEST(Convection, ZeroFluxFaceContributesNothing) {
  const Mesh m = build_cartesian(2, 1);
  const std::size_t f = m.interior_faces()[0];
  CellField rho;
  rho.values = {1.0, 5.0};
  HybridVelocity w = HybridVelocity::zero(m);
  w.faces[f] = Vec2(-m.face_normal(f).y(), m.face_normal(f).x());
  const UpwindTrace t = upwind_trace(m, rho, w);
  EXPECT_EQ(t.flux[f], 0.0);
  EXPECT_EQ(t.mass_flux(f), 0.0);
}

TEST(Convection, UniformDensityTrace) {
  const Mesh m = build_triangular(3);
  std::mt19937_64 rng(1);
  const UpwindTrace t = upwind_trace(m, CellField::constant(m, 2.5), random_hybrid(m, rng));
  for (std::size_t f : m.interior_faces()) EXPECT_EQ(t.density[f], 2.5);
}

TEST(Convection, InflowWithoutDataIsRejected) {
  const Mesh m = build_cartesian(2, 2);
  HybridVelocity w = HybridVelocity::zero(m, false);
  w.faces[m.boundary_faces()[0]] = -m.face_normal(m.boundary_faces()[0]);
  EXPECT_THROW(upwind_trace(m, CellField::constant(m, 1.0), w), std::invalid_argument);
}

TEST(Convection, ChMatchesOracleAndIsSkew) {
  const Mesh m = build_cartesian(2, 2);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const CellField rho = random_cell_field(m, rng, 1.0, 3.0);
    const HybridVelocity w = random_hybrid(m, rng);
    const HybridVelocity v = random_hybrid(m, rng);
    const HybridVelocity z = random_hybrid(m, rng);
    const double value = c_h(m, rho, w, v, z);
    EXPECT_NEAR(value, c_h_oracle(m, rho, w, v, z), 1e-13);
    const UpwindTrace trace = upwind_trace(m, rho, w);
    EXPECT_LE(std::abs(c_h(m, trace, v, v)), 1e-12 * (1.0 + c_h_scale(m, trace, v, v)));
  }
  EXPECT_EQ(c_h(m, CellField::constant(m, 1.0), HybridVelocity::zero(m), random_hybrid(m, rng),
                random_hybrid(m, rng)),
            0.0);
}

TEST(Convection, AdvectionOfConstantVanishesOnZh) {
  const Mesh m = bundled_mesh("hexa_0");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const HybridVelocity w = random_divergence_free(m, rng);
    const CellField chi = random_cell_field(m, rng, -1.0, 1.0);
    EXPECT_LE(std::abs(d_h(m, w, CellField::constant(m, 1.7), chi)), 1e-12);
  }
}

TEST(Convection, PartialCoercivityAndJumpForm) {
  for (const Mesh& m : {build_triangular(4), bundled_mesh("hexa_0")}) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
      const HybridVelocity w = random_divergence_free(m, rng);
      const CellField eta = random_cell_field(m, rng, -1.0, 1.0);
      const CellField chi = random_cell_field(m, rng, -1.0, 1.0);
      const double s = upwind_seminorm(m, w, eta);
      EXPECT_NEAR(d_h(m, w, eta, eta), s * s, 1e-12 * (1.0 + s * s));
      const double d = d_h(m, w, eta, chi);
      EXPECT_NEAR(d, d_h_jump_form(m, w, eta, chi), 1e-12 * (1.0 + std::abs(d)));
    }
  }
}

TEST(Convection, JumpFormDegenerateCases) {
  const Mesh m = build_triangular(3);
  std::mt19937_64 rng(13);
  const HybridVelocity w = random_divergence_free(m, rng);
  const CellField eta = random_cell_field(m, rng, -1.0, 1.0);
  EXPECT_EQ(d_h_jump_form(m, w, CellField::constant(m, 2.0), eta), 0.0);
  EXPECT_LE(std::abs(d_h_jump_form(m, w, eta, CellField::constant(m, 3.0))), 1e-13);
}

TEST(Convection, SeminormScaling) {
  const Mesh m = build_cartesian(4, 4);
  std::mt19937_64 rng(14);
  const HybridVelocity w = random_divergence_free(m, rng);
  const CellField eta = random_cell_field(m, rng, 0.0, 1.0);
  EXPECT_EQ(upwind_seminorm(m, w, CellField::constant(m, 4.0)), 0.0);
  const double s = upwind_seminorm(m, w, eta);
  const double s2 = upwind_seminorm(m, 2.0 * w, eta);
  EXPECT_NEAR(s2 * s2, 2.0 * s * s, 1e-14);
}

TEST(Convection, DiscreteIntegrationByParts) {
  for (const Mesh& m : {build_cartesian(3, 3), build_triangular(3), bundled_mesh("hexa_0")}) {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 50; ++i) {
      const IbpResidual r = discrete_ibp_check(m, random_cell_field(m, rng, 1.0, 3.0),
                                               random_divergence_free(m, rng), random_hybrid(m, rng));
      EXPECT_LE(r.residual, 1e-12);
    }
    const IbpResidual zero = discrete_ibp_check(m, CellField::constant(m, 1.0),
                                                HybridVelocity::zero(m), random_hybrid(m, rng));
    EXPECT_EQ(zero.lhs, 0.0);
    EXPECT_EQ(zero.rhs, 0.0);
    const IbpResidual uniform = discrete_ibp_check(m, CellField::constant(m, 2.0),
                                                   random_divergence_free(m, rng), random_hybrid(m, rng));
    EXPECT_LE(uniform.residual, 1e-12);
  }
}

TEST(Convection, RandomPolynomialStreamfunctionsGiveDivergenceFreeInterpolants) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mesh m = bundled_mesh("hexa_1");
  for (int i = 0; i < 5; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    // curl of x^2(1-x)^2 y^2(1-y)^2 (a + b x + c y), differentiated by hand.
    const VectorFunction curl = [=](const Vec2& p) -> Vec2 {
      const double x = p.x(), y = p.y();
      const double bx = x * x * (1 - x) * (1 - x), by = y * y * (1 - y) * (1 - y);
      const double dbx = 2 * x * (1 - x) * (1 - 2 * x), dby = 2 * y * (1 - y) * (1 - 2 * y);
      const double g = a + b * x + c * y;
      return Vec2(bx * (dby * g + by * c), -(dbx * g + bx * b) * by);
    };
    const CellField d = divergence(m, interpolate_velocity(m, curl, true));
    for (double v : d.values) EXPECT_LE(std::abs(v), 1e-12);
  }
}
