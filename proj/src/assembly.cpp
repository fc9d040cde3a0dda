#include "vdns/assembly.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/UmfPackSupport>

#include "vdns/quadrature.hpp"

namespace vdns {

using Triplets = std::vector<Eigen::Triplet<double>>;

std::vector<Vec2> cell_force_integrals(const Mesh& mesh, const VectorFunction& f) {
  std::vector<Vec2> out(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    out[c] = integrate_cell(mesh, c, f);
  }
  return out;
}

SparseSystem assemble_saddle(const Mesh& mesh, const LocalOperators& ops,
                             const SaddleLayout& layout, const SaddleInputs& in) {
  const VelocityDofs& dofs = layout.velocity;
  const auto n = static_cast<Eigen::Index>(layout.size());
  if (in.include_mass && (!in.rho_new || !in.sigma_new || !in.sigma_old || !in.u_old)) {
    throw std::invalid_argument("assemble_saddle: mass term needs rho, sigma and the old velocity");
  }
  if (in.include_convection && !in.transport) {
    throw std::invalid_argument("assemble_saddle: convection needs an upwind trace");
  }
  if (!in.force_integrals.empty() && in.force_integrals.size() != mesh.n_cells()) {
    throw std::invalid_argument("assemble_saddle: force integrals do not match the mesh");
  }
  if (!(in.dt > 0.0)) {
    throw std::invalid_argument("assemble_saddle: dt must be positive");
  }

  SparseSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.symmetric = !in.include_convection;
  Triplets t;
  t.reserve(static_cast<std::size_t>(n) * 24);

  auto boundary_value = [&](std::size_t f) -> Vec2 {
    return in.boundary_velocity ? in.boundary_velocity->faces[f] : Vec2::Zero();
  };

  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const CellOperators& op = ops.cell(c);
    const std::size_t k = mesh.n_cell_faces(c);
    const auto faces = mesh.cell_faces(c);
    const std::ptrdiff_t gc = dofs.cell(c);

    // Viscous term with boundary values lifted to the right-hand side.
    for (std::size_t r = 0; r <= k; ++r) {
      const std::ptrdiff_t gr = dofs.local_node(mesh, c, r);
      if (gr == VelocityDofs::eliminated) continue;
      for (std::size_t s = 0; s <= k; ++s) {
        const double a = in.mu * op.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
        const std::ptrdiff_t gs = dofs.local_node(mesh, c, s);
        if (gs == VelocityDofs::eliminated) {
          sys.rhs.segment<2>(gr) -= a * boundary_value(faces[s - 1]);
        } else {
          t.emplace_back(gr, gs, a);
          t.emplace_back(gr + 1, gs + 1, a);
        }
      }
    }

    if (in.include_mass) {
      const double area = mesh.cell_measure(c);
      const double m = area * (*in.rho_new)[c] / in.dt;
      t.emplace_back(gc, gc, m);
      t.emplace_back(gc + 1, gc + 1, m);
      sys.rhs.segment<2>(gc) +=
          area * (*in.sigma_new)[c] * (*in.sigma_old)[c] / in.dt * in.u_old->cells[c];

      // j_h only couples the cell with its interior faces.
      const double w = in.rho_lower / in.dt;
      for (std::size_t r = 0; r <= k; ++r) {
        const std::ptrdiff_t gr = dofs.local_node(mesh, c, r);
        if (gr == VelocityDofs::eliminated) continue;
        Vec2 old = Vec2::Zero();
        for (std::size_t s = 0; s <= k; ++s) {
          const double jv = op.j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
          if (jv == 0.0) continue;
          const std::ptrdiff_t gs = dofs.local_node(mesh, c, s);
          t.emplace_back(gr, gs, w * jv);
          t.emplace_back(gr + 1, gs + 1, w * jv);
          old += jv * (s == 0 ? in.u_old->cells[c] : in.u_old->faces[faces[s - 1]]);
        }
        sys.rhs.segment<2>(gr) += w * old;
      }
    }

    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t f = faces[j];
      const std::ptrdiff_t gf = dofs.face(f);
      const Vec2 n = mesh.outward_normal(c, j);
      const double len = mesh.face_measure(f);

      if (in.include_convection) {
        const double m = 0.5 * mesh.face_sign(c, j) * in.transport->mass_flux(f);
        if (m != 0.0) {
          // +m u_F . z_T - m u_T . z_F
          if (gf == VelocityDofs::eliminated) {
            sys.rhs.segment<2>(gc) -= m * boundary_value(f);
          } else {
            t.emplace_back(gc, gf, m);
            t.emplace_back(gc + 1, gf + 1, m);
            t.emplace_back(gf, gc, -m);
            t.emplace_back(gf + 1, gc + 1, -m);
          }
        }
      }

      // -int p D_h v and -int q D_h u.
      const std::ptrdiff_t gp = layout.pressure(c);
      if (gf == VelocityDofs::eliminated) {
        sys.rhs(gp) += len * boundary_value(f).dot(n);
      } else {
        for (int i = 0; i < 2; ++i) {
          t.emplace_back(gf + i, gp, -len * n(i));
          t.emplace_back(gp, gf + i, -len * n(i));
        }
      }
    }

    t.emplace_back(layout.pressure(c), layout.multiplier(), mesh.cell_measure(c));
    t.emplace_back(layout.multiplier(), layout.pressure(c), mesh.cell_measure(c));

    if (!in.force_integrals.empty()) {
      sys.rhs.segment<2>(gc) += in.force_integrals[c];
    }
  }

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();
  return sys;
}

SparseSystem assemble_density_transport(const Mesh& mesh, const HybridVelocity& u,
                                        const CellField& rho_old, double dt,
                                        std::span<const double> inflow) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("assemble_density_transport: dt must be positive");
  }
  const auto n = static_cast<Eigen::Index>(mesh.n_cells());
  SparseSystem sys;
  sys.rhs.resize(n);
  sys.symmetric = false;
  Triplets t;
  t.reserve(mesh.n_cells() * 5);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double mass = mesh.cell_measure(c) / dt;
    double diag = mass;
    sys.rhs(static_cast<Eigen::Index>(c)) = mass * rho_old[c];
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const double q = mesh.face_measure(f) * u.faces[f].dot(mesh.outward_normal(c, j));
      const double q_plus = std::max(q, 0.0);
      const double q_minus = std::max(-q, 0.0);
      diag += q_plus;
      if (q_minus == 0.0) continue;
      if (mesh.is_boundary(f)) {
        if (inflow.empty()) {
          throw std::invalid_argument("assemble_density_transport: inflow through boundary face " +
                                      std::to_string(f) + " without boundary density");
        }
        sys.rhs(static_cast<Eigen::Index>(c)) += q_minus * inflow[f];
      } else {
        t.emplace_back(c, mesh.other_cell(f, c), -q_minus);
      }
    }
    t.emplace_back(c, c, diag);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();
  return sys;
}

namespace {

/// UMFPACK factorisation owning its matrix, with the symbolic analysis reused
/// while the sparsity pattern is unchanged.
class Factorization {
public:
  Factorization() : lu_(std::make_unique<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>>()) {}

  void factorize(Eigen::SparseMatrix<double> m) {
    m.makeCompressed();
    const bool reuse = analyzed_ && same_pattern(m);
    matrix_ = std::move(m);
    if (!reuse) {
      lu_->analyzePattern(matrix_);
      if (lu_->info() != Eigen::Success) {
        analyzed_ = false;
        throw SolveError("solve: symbolic analysis failed");
      }
      outer_.assign(matrix_.outerIndexPtr(), matrix_.outerIndexPtr() + matrix_.outerSize() + 1);
      inner_.assign(matrix_.innerIndexPtr(), matrix_.innerIndexPtr() + matrix_.nonZeros());
      analyzed_ = true;
    }
    lu_->factorize(matrix_);
    if (lu_->info() != Eigen::Success) {
      throw SolveError("solve: LU factorisation failed (UMFPACK status " +
                       std::to_string(lu_->umfpackFactorizeReturncode()) +
                       (lu_->umfpackFactorizeReturncode() == 1 ? ", singular matrix)" : ")"));
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_->solve(b);
    if (lu_->info() != Eigen::Success) throw SolveError("solve: triangular solves failed");
    return x;
  }

  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

private:
  bool same_pattern(const Eigen::SparseMatrix<double>& m) const {
    if (outer_.size() != static_cast<std::size_t>(m.outerSize() + 1) ||
        inner_.size() != static_cast<std::size_t>(m.nonZeros())) {
      return false;
    }
    return std::equal(outer_.begin(), outer_.end(), m.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), m.innerIndexPtr());
  }

  std::unique_ptr<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>> lu_;
  Eigen::SparseMatrix<double> matrix_;
  std::vector<int> outer_;
  std::vector<int> inner_;
  bool analyzed_ = false;
};

double matrix_inf_norm(const Eigen::SparseMatrix<double>& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      rows(it.row()) += std::abs(it.value());
    }
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

void check_dimensions(const SparseSystem& system) {
  const auto& a = system.matrix;
  if (a.rows() != a.cols() || a.rows() != system.rhs.size()) {
    std::ostringstream msg;
    msg << "solve: dimension mismatch (matrix " << a.rows() << "x" << a.cols() << ", rhs "
        << system.rhs.size() << ")";
    throw SolveError(msg.str());
  }
}

/// Solves with `apply_inverse` and refines until
/// ||Ax - b|| <= tol (||b|| + ||A|| ||x||) in the infinity norm.
template <class Inverse>
Eigen::VectorXd refine(const SparseSystem& system, Inverse&& apply_inverse, double tolerance,
                       double& residual) {
  const auto& a = system.matrix;
  const double norm_a = matrix_inf_norm(a);
  const double norm_b = system.rhs.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd x = apply_inverse(system.rhs);
  for (int sweep = 0;; ++sweep) {
    const Eigen::VectorXd r = system.rhs - a * x;
    const double bound = norm_b + norm_a * x.lpNorm<Eigen::Infinity>();
    residual = bound > 0.0 ? r.lpNorm<Eigen::Infinity>() / bound : 0.0;
    if (!std::isfinite(residual)) {
      throw SolveError("solve: non-finite solution (singular system?)");
    }
    if (residual <= tolerance) break;
    if (sweep == 3) {
      std::ostringstream msg;
      msg << "solve: relative residual " << residual << " above tolerance " << tolerance
          << " after iterative refinement";
      throw SolveError(msg.str());
    }
    x += apply_inverse(r);
  }
  return x;
}

}  // namespace

struct LinearSolver::Impl {
  Factorization lu;
};

LinearSolver::LinearSolver(double tolerance) : impl_(std::make_unique<Impl>()), tolerance_(tolerance) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const SparseSystem& system) {
  check_dimensions(system);
  if (system.matrix.rows() == 0) return Eigen::VectorXd();
  impl_->lu.factorize(system.matrix);
  return refine(system, [&](const Eigen::VectorXd& b) { return impl_->lu.solve(b); }, tolerance_,
                last_residual_);
}

Eigen::VectorXd solve(const SparseSystem& system) {
  LinearSolver solver;
  return solver.solve(system);
}

struct SaddleSolver::Impl {
  Factorization lu;
  std::vector<double> cell_measure;
  double total_measure = 0.0;
};

SaddleSolver::SaddleSolver(const SaddleLayout& layout, double tolerance)
    : impl_(std::make_unique<Impl>()),
      n_velocity_(layout.n_velocity()),
      n_cells_(layout.size() - layout.n_velocity() - 1),
      tolerance_(tolerance) {}
SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

Eigen::VectorXd SaddleSolver::reduced_solve(const Eigen::VectorXd& b) const {
  const auto nv = static_cast<Eigen::Index>(n_velocity_);
  const auto nc = static_cast<Eigen::Index>(n_cells_);
  const Eigen::Index mult = nv + nc;
  double flux = 0.0;
  for (Eigen::Index c = 0; c < nc; ++c) flux += b(nv + c);
  const double lambda = flux / impl_->total_measure;

  Eigen::VectorXd r = b.head(mult);
  for (Eigen::Index c = 0; c < nc; ++c) r(nv + c) -= impl_->cell_measure[c] * lambda;
  r(nv) = 0.0;
  const Eigen::VectorXd y = impl_->lu.solve(r);

  Eigen::VectorXd x(mult + 1);
  x.head(mult) = y;
  double mean = 0.0;
  for (Eigen::Index c = 0; c < nc; ++c) mean += impl_->cell_measure[c] * y(nv + c);
  const double shift = (b(mult) - mean) / impl_->total_measure;
  x.segment(nv, nc).array() += shift;
  x(mult) = lambda;
  return x;
}

Eigen::VectorXd SaddleSolver::solve(const SparseSystem& system) {
  check_dimensions(system);
  const auto nv = static_cast<Eigen::Index>(n_velocity_);
  const auto nc = static_cast<Eigen::Index>(n_cells_);
  const Eigen::Index mult = nv + nc;
  if (system.matrix.rows() != mult + 1 || nc == 0) {
    throw SolveError("solve: system does not match the saddle layout");
  }

  impl_->cell_measure.assign(static_cast<std::size_t>(nc), 0.0);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  for (Eigen::Index k = 0; k < system.matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, k); it; ++it) {
      const Eigen::Index i = it.row();
      const Eigen::Index j = it.col();
      if (j == mult && i >= nv && i < mult) {
        impl_->cell_measure[static_cast<std::size_t>(i - nv)] = it.value();
      }
      if (i == mult || j == mult || i == nv || j == nv) continue;
      t.emplace_back(i, j, it.value());
    }
  }
  t.emplace_back(nv, nv, 1.0);
  impl_->total_measure = 0.0;
  for (double m : impl_->cell_measure) {
    if (!(m > 0.0)) throw SolveError("solve: saddle system without a mean constraint");
    impl_->total_measure += m;
  }
  Eigen::SparseMatrix<double> reduced(mult, mult);
  reduced.setFromTriplets(t.begin(), t.end());
  impl_->lu.factorize(std::move(reduced));
  return refine(system, [&](const Eigen::VectorXd& b) { return reduced_solve(b); }, tolerance_,
                last_residual_);
}

}  // namespace vdns
