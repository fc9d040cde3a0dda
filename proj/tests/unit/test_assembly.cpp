#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vdns/assembly.hpp"
#include "vdns/verify.hpp"

using namespace vdns;

namespace {

struct SaddleFixture {
  Mesh mesh = build_cartesian(2, 2);
  LocalOperators ops{mesh};
  SaddleLayout layout{mesh};
  CellField rho, sigma_new, sigma_old;
  HybridVelocity u_old;
  UpwindTrace trace;
  SaddleInputs in;

  explicit SaddleFixture(std::uint64_t seed, bool convection = true) {
    std::mt19937_64 rng(seed);
    rho = random_cell_field(mesh, rng, 1.0, 3.0);
    sigma_new = rho;
    for (double& s : sigma_new.values) s = std::sqrt(s);
    sigma_old = random_cell_field(mesh, rng, 1.0, 2.0);
    u_old = random_hybrid(mesh, rng);
    trace = upwind_trace(mesh, rho, random_divergence_free(mesh, rng));
    in.rho_new = &rho;
    in.sigma_new = &sigma_new;
    in.sigma_old = &sigma_old;
    in.u_old = &u_old;
    in.transport = &trace;
    in.dt = 0.1;
    in.mu = 0.7;
    in.rho_lower = 1.0;
    in.include_convection = convection;
  }
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

}  // namespace

TEST(Assembly, SaddleMatrixAppliesTheDiscreteForms) {
  // Independent oracle: y^T A x from the separately tested bilinear forms.
  SaddleFixture fx(21);
  const Mesh& m = fx.mesh;
  const SparseSystem sys = assemble_saddle(m, fx.ops, fx.layout, fx.in);
  std::mt19937_64 rng(22);
  const auto nv = static_cast<Eigen::Index>(fx.layout.n_velocity());
  const auto nc = static_cast<Eigen::Index>(m.n_cells());
  for (int s = 0; s < 5; ++s) {
    const Eigen::VectorXd x = random_vector(sys.matrix.rows(), rng);
    const Eigen::VectorXd y = random_vector(sys.matrix.rows(), rng);
    const HybridVelocity u = fx.layout.velocity.unpack(m, x.head(nv));
    const HybridVelocity v = fx.layout.velocity.unpack(m, y.head(nv));
    double expected = 0.0;
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
      expected += m.cell_measure(c) * fx.rho[c] * u.cells[c].dot(v.cells[c]) / fx.in.dt;
    }
    expected += fx.in.rho_lower * jh(m, u, v) / fx.in.dt;
    expected += fx.in.mu * a_h(m, fx.ops, u, v);
    expected += c_h(m, fx.trace, u, v);
    const CellField du = divergence(m, u);
    const CellField dv = divergence(m, v);
    const double lx = x(nv + nc);
    const double ly = y(nv + nc);
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const double area = m.cell_measure(c);
      expected -= area * x(nv + ci) * dv[c];
      expected -= area * y(nv + ci) * du[c];
      expected += area * (ly * x(nv + ci) + lx * y(nv + ci));
    }
    EXPECT_NEAR(y.dot(sys.matrix * x), expected, 1e-13 * (1.0 + std::abs(expected)));
  }
}

TEST(Assembly, RightHandSideCarriesOldStateAndForce) {
  SaddleFixture fx(23);
  const Mesh& m = fx.mesh;
  std::vector<Vec2> force(m.n_cells(), Vec2(0.5, -1.0));
  fx.in.force_integrals = force;
  const SparseSystem sys = assemble_saddle(m, fx.ops, fx.layout, fx.in);
  std::mt19937_64 rng(24);
  const auto nv = static_cast<Eigen::Index>(fx.layout.n_velocity());
  const Eigen::VectorXd y = random_vector(sys.matrix.rows(), rng);
  const HybridVelocity v = fx.layout.velocity.unpack(m, y.head(nv));
  double expected = fx.in.rho_lower * jh(m, fx.u_old, v) / fx.in.dt;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    expected += m.cell_measure(c) * fx.sigma_new[c] * fx.sigma_old[c] *
                fx.u_old.cells[c].dot(v.cells[c]) / fx.in.dt;
    expected += force[c].dot(v.cells[c]);
  }
  EXPECT_NEAR(y.dot(sys.rhs), expected, 1e-13 * (1.0 + std::abs(expected)));
}

TEST(Assembly, ZeroDataGivesZeroSolution) {
  SaddleFixture fx(25);
  fx.rho = CellField::constant(fx.mesh, 1.3);
  fx.sigma_new = CellField::constant(fx.mesh, std::sqrt(1.3));
  fx.sigma_old = fx.sigma_new;
  fx.u_old = HybridVelocity::zero(fx.mesh);
  SparseSystem sys = assemble_saddle(fx.mesh, fx.ops, fx.layout, fx.in);
  EXPECT_EQ(sys.rhs.norm(), 0.0);
  SaddleSolver solver(fx.layout);
  EXPECT_EQ(solver.solve(sys).norm(), 0.0);
}

TEST(Assembly, SymmetricWithoutConvection) {
  SaddleFixture fx(26, false);
  const SparseSystem sys = assemble_saddle(fx.mesh, fx.ops, fx.layout, fx.in);
  EXPECT_TRUE(sys.symmetric);
  const Eigen::SparseMatrix<double> at = sys.matrix.transpose();
  EXPECT_LE((sys.matrix - at).norm(), 1e-13 * sys.matrix.norm());

  SaddleFixture with(26, true);
  EXPECT_FALSE(assemble_saddle(with.mesh, with.ops, with.layout, with.in).symmetric);
}

TEST(Assembly, StokesLimitWithoutMass) {
  SaddleFixture fx(27, false);
  fx.in.include_mass = false;
  const SparseSystem sys = assemble_saddle(fx.mesh, fx.ops, fx.layout, fx.in);
  const auto nv = static_cast<Eigen::Index>(fx.layout.n_velocity());
  const Eigen::MatrixXd dense(sys.matrix);
  const Eigen::MatrixXd a = dense.topLeftCorner(nv, nv);
  const VelocityDofs& dofs = fx.layout.velocity;
  const Eigen::MatrixXd ah(fx.in.mu * assemble_ah(fx.mesh, fx.ops, dofs));
  EXPECT_LE((a - ah).norm(), 1e-13 * ah.norm());
}

TEST(Assembly, SaddleSolverAgreesWithDirectLu) {
  SaddleFixture fx(28);
  std::vector<Vec2> force(fx.mesh.n_cells(), Vec2(0.2, 0.4));
  fx.in.force_integrals = force;
  const SparseSystem sys = assemble_saddle(fx.mesh, fx.ops, fx.layout, fx.in);
  SaddleSolver saddle(fx.layout);
  const Eigen::VectorXd a = saddle.solve(sys);
  const Eigen::VectorXd b = solve(sys);
  EXPECT_LE((a - b).norm(), 1e-10 * b.norm());
  EXPECT_LE(saddle.last_relative_residual(), 1e-10);
  double mean = 0.0;
  for (std::size_t c = 0; c < fx.mesh.n_cells(); ++c) {
    mean += fx.mesh.cell_measure(c) * a(fx.layout.pressure(c));
  }
  EXPECT_LE(std::abs(mean), 1e-12);
}

TEST(Assembly, RejectsMissingInputs) {
  SaddleFixture fx(29);
  fx.in.transport = nullptr;
  EXPECT_THROW(assemble_saddle(fx.mesh, fx.ops, fx.layout, fx.in), std::invalid_argument);
  SaddleFixture bad(29);
  bad.in.dt = 0.0;
  EXPECT_THROW(assemble_saddle(bad.mesh, bad.ops, bad.layout, bad.in), std::invalid_argument);
}

TEST(Assembly, TransportWithZeroVelocityIsIdentityStep) {
  const Mesh m = build_triangular(3);
  std::mt19937_64 rng(30);
  const CellField rho = random_cell_field(m, rng, 1.0, 2.0);
  const Eigen::VectorXd x = solve(assemble_density_transport(m, HybridVelocity::zero(m), rho, 0.1));
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    EXPECT_NEAR(x(static_cast<Eigen::Index>(c)), rho[c], 1e-14);
  }
}

TEST(Assembly, TransportPreservesUniformDensity) {
  const Mesh m = build_triangular(4);
  std::mt19937_64 rng(31);
  const Eigen::VectorXd x = solve(assemble_density_transport(
      m, random_divergence_free(m, rng), CellField::constant(m, 1.7), 0.05));
  for (Eigen::Index i = 0; i < x.size(); ++i) EXPECT_NEAR(x(i), 1.7, 1e-13);
}

TEST(Assembly, TransportMatrixRowsAreDominant) {
  const Mesh m = build_cartesian(4, 4);
  std::mt19937_64 rng(32);
  for (int s = 0; s < 20; ++s) {
    const SparseSystem sys = assemble_density_transport(m, random_divergence_free(m, rng),
                                                        CellField::constant(m, 1.0), 0.3);
    const Eigen::MatrixXd a(sys.matrix);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (i == j) continue;
        EXPECT_LE(a(i, j), 0.0);
        off += std::abs(a(i, j));
      }
      EXPECT_GE(a(i, i) - off, -1e-13 * a(i, i));
    }
  }
}

TEST(Assembly, TransportNeedsInflowData) {
  const Mesh m = build_cartesian(2, 2);
  HybridVelocity u = HybridVelocity::zero(m, false);
  for (std::size_t f : m.boundary_faces()) u.faces[f] = Vec2(1.0, 0.0);
  EXPECT_THROW(assemble_density_transport(m, u, CellField::constant(m, 1.0), 0.1),
               std::invalid_argument);
}

TEST(Solve, IdentityReturnsRightHandSide) {
  SparseSystem sys;
  sys.matrix.resize(4, 4);
  sys.matrix.setIdentity();
  sys.rhs = Eigen::Vector4d(1.0, -2.0, 3.0, 0.5);
  EXPECT_EQ((solve(sys) - sys.rhs).norm(), 0.0);
}

TEST(Solve, SmallSaddleToy) {
  SparseSystem sys;
  sys.matrix.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}};
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::Vector2d(4.0, 1.0);
  const Eigen::VectorXd x = solve(sys);
  EXPECT_NEAR(x(0), 1.0, 1e-12);
  EXPECT_NEAR(x(1), 2.0, 1e-12);
}

TEST(Solve, RandomSpdMeetsResidualContract) {
  std::mt19937_64 rng(33);
  const Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(50, 50, [&]() {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  });
  const Eigen::MatrixXd spd = b * b.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
  SparseSystem sys;
  sys.matrix = spd.sparseView();
  sys.rhs = random_vector(50, rng);
  LinearSolver solver;
  const Eigen::VectorXd x = solver.solve(sys);
  EXPECT_LE(solver.last_relative_residual(), 1e-10);
  EXPECT_LE((spd * x - sys.rhs).norm(), 1e-10 * sys.rhs.norm());
}

TEST(Solve, SingularAndMismatchedSystemsThrow) {
  SparseSystem sys;
  sys.matrix.resize(2, 2);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, 1.0}, {1, 0, 1.0}};
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.rhs = Eigen::Vector2d(1.0, 2.0);
  EXPECT_THROW(solve(sys), SolveError);
  sys.rhs = Eigen::Vector3d(1.0, 2.0, 3.0);
  EXPECT_THROW(solve(sys), SolveError);
}
