#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "vdns/convection.hpp"
#include "vdns/mesh.hpp"
#include "vdns/operators.hpp"
#include "vdns/spaces.hpp"

namespace vdns {

class SolveError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unknowns of the velocity-pressure system: velocity DOFs of the
/// zero-boundary space, one pressure per cell, then one multiplier for the
/// zero-mean pressure constraint.
class SaddleLayout {
public:
  explicit SaddleLayout(const Mesh& mesh) : velocity(mesh), n_cells_(mesh.n_cells()) {}

  VelocityDofs velocity;

  std::size_t n_velocity() const { return velocity.size(); }
  std::ptrdiff_t pressure(std::size_t c) const {
    return static_cast<std::ptrdiff_t>(velocity.size() + c);
  }
  std::ptrdiff_t multiplier() const { return static_cast<std::ptrdiff_t>(velocity.size() + n_cells_); }
  std::size_t size() const { return velocity.size() + n_cells_ + 1; }

private:
  std::size_t n_cells_;
};

struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  /// False once a non-symmetric contribution (convection) has been added.
  bool symmetric = true;
};

/// Inputs of one momentum step. The unknown velocity takes `boundary_velocity`
/// values on boundary faces (zero for the homogeneous problem); test functions
/// vanish there.
struct SaddleInputs {
  const CellField* rho_new = nullptr;
  const CellField* sigma_new = nullptr;
  const CellField* sigma_old = nullptr;
  const HybridVelocity* u_old = nullptr;
  /// Upwind trace transporting momentum (first argument of c_h).
  const UpwindTrace* transport = nullptr;
  /// Per-cell integrals of the body force at the new time level.
  std::span<const Vec2> force_integrals;
  /// Boundary face values of the new velocity; null means zero.
  const HybridVelocity* boundary_velocity = nullptr;
  double dt = 1.0;
  double mu = 1.0;
  /// Weight of the j_h term in the unsteady part (lower density bound).
  double rho_lower = 1.0;
  bool include_mass = true;
  bool include_convection = true;
};

/// Per-cell integrals int_T f by quadrature.
std::vector<Vec2> cell_force_integrals(const Mesh& mesh, const VectorFunction& f);

SparseSystem assemble_saddle(const Mesh& mesh, const LocalOperators& ops,
                             const SaddleLayout& layout, const SaddleInputs& in);

/// Implicit upwind transport: (|T|/dt)(rho_T - rho_T^old) + sum_F [q+ rho_T - q- rho_T'] = 0,
/// with inflow boundary densities moved to the right-hand side.
SparseSystem assemble_density_transport(const Mesh& mesh, const HybridVelocity& u,
                                        const CellField& rho_old, double dt,
                                        std::span<const double> inflow = {});

/// Sparse LU (UMFPACK) with the symbolic factorisation reused while the pattern is unchanged.
/// Every solution is checked against ||Ax - b|| <= tol (||b|| + ||A|| ||x||)
/// in the infinity norm, with up to a few steps of iterative refinement.
class LinearSolver {
public:
  explicit LinearSolver(double tolerance = 1e-10);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  Eigen::VectorXd solve(const SparseSystem& system);

  double last_relative_residual() const { return last_residual_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double tolerance_;
  double last_residual_ = 0.0;
};

/// One-shot convenience wrapper around LinearSolver.
Eigen::VectorXd solve(const SparseSystem& system);

/// Solver for systems laid out by SaddleLayout.
///
/// The dense multiplier row and column ruin the sparsity of a direct LU, so
/// the multiplier is eliminated: the pressure of cell 0 is pinned, the
/// divergence right-hand side is made compatible (which determines the
/// multiplier), and the pressure is shifted afterwards to satisfy the mean
/// constraint. The residual contract is checked on the full system, with
/// iterative refinement as in LinearSolver.
class SaddleSolver {
public:
  explicit SaddleSolver(const SaddleLayout& layout, double tolerance = 1e-10);
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;
  SaddleSolver& operator=(SaddleSolver&&) noexcept;

  Eigen::VectorXd solve(const SparseSystem& system);

  double last_relative_residual() const { return last_residual_; }

private:
  Eigen::VectorXd reduced_solve(const Eigen::VectorXd& b) const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_velocity_;
  std::size_t n_cells_;
  double tolerance_;
  double last_residual_ = 0.0;
};

}  // namespace vdns
