#include "vdns/operators.hpp"

#include <cmath>

namespace vdns {

namespace {

CellOperators build_cell(const Mesh& mesh, std::size_t c) {
  const std::size_t k = mesh.n_cell_faces(c);
  const double area = mesh.cell_measure(c);
  const double hT = mesh.cell_diameter(c);
  const Vec2& xt = mesh.cell_centroid(c);

  CellOperators op;
  op.grad = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(k + 1));
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t f = mesh.cell_faces(c)[j];
    const Vec2 w = mesh.face_measure(f) / area * mesh.outward_normal(c, j);
    op.grad.col(static_cast<Eigen::Index>(j + 1)) += w;
    op.grad.col(0) -= w;
  }

  // Face residuals pi_F(r_T v) - v_F = v_T + grad v . (x_F - x_T) - v_F.
  Eigen::MatrixXd residual = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(k + 1));
  Eigen::VectorXd face_weight(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t f = mesh.cell_faces(c)[j];
    const auto row = static_cast<Eigen::Index>(j);
    residual.row(row) = (mesh.face_midpoint(f) - xt).transpose() * op.grad;
    residual(row, 0) += 1.0;
    residual(row, row + 1) -= 1.0;
    face_weight(row) = mesh.face_measure(f) / hT;
  }
  op.stab = residual.transpose() * face_weight.asDiagonal() * residual;
  op.a = area * op.grad.transpose() * op.grad + op.stab;

  op.j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k + 1));
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t f = mesh.cell_faces(c)[j];
    if (mesh.is_boundary(f)) continue;
    const double w = hT * mesh.face_measure(f);
    const auto jf = static_cast<Eigen::Index>(j + 1);
    op.j(0, 0) += w;
    op.j(jf, jf) += w;
    op.j(0, jf) -= w;
    op.j(jf, 0) -= w;
  }
  return op;
}

Eigen::VectorXd component(const LocalVelocity& v, int comp) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.faces.size() + 1));
  x(0) = v.cell(comp);
  for (std::size_t j = 0; j < v.faces.size(); ++j) {
    x(static_cast<Eigen::Index>(j + 1)) = v.faces[j](comp);
  }
  return x;
}

}  // namespace

Eigen::RowVectorXd CellOperators::div_map() const {
  Eigen::RowVectorXd d(2 * grad.cols());
  for (Eigen::Index k = 0; k < grad.cols(); ++k) {
    d(2 * k) = grad(0, k);
    d(2 * k + 1) = grad(1, k);
  }
  return d;
}

LocalOperators::LocalOperators(const Mesh& mesh) {
  cells_.reserve(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    cells_.push_back(build_cell(mesh, c));
  }
}

LocalVelocity restrict_to_cell(const Mesh& mesh, const HybridVelocity& v, std::size_t cell) {
  LocalVelocity local{v.cells[cell], {}};
  local.faces.reserve(mesh.n_cell_faces(cell));
  for (std::size_t f : mesh.cell_faces(cell)) {
    local.faces.push_back(v.faces[f]);
  }
  return local;
}

Mat2 grad_T(const Mesh& mesh, std::size_t cell, const LocalVelocity& v) {
  Mat2 g = Mat2::Zero();
  for (std::size_t j = 0; j < v.faces.size(); ++j) {
    const std::size_t f = mesh.cell_faces(cell)[j];
    g += mesh.face_measure(f) * (v.faces[j] - v.cell) * mesh.outward_normal(cell, j).transpose();
  }
  return g / mesh.cell_measure(cell);
}

Mat2 grad_T(const Mesh& mesh, std::size_t cell, const HybridVelocity& v) {
  Mat2 g = Mat2::Zero();
  for (std::size_t j = 0; j < mesh.n_cell_faces(cell); ++j) {
    const std::size_t f = mesh.cell_faces(cell)[j];
    g += mesh.face_measure(f) * (v.faces[f] - v.cells[cell]) *
         mesh.outward_normal(cell, j).transpose();
  }
  return g / mesh.cell_measure(cell);
}

double div_T(const Mesh& mesh, std::size_t cell, const LocalVelocity& v) {
  double s = 0.0;
  for (std::size_t j = 0; j < v.faces.size(); ++j) {
    const std::size_t f = mesh.cell_faces(cell)[j];
    s += mesh.face_measure(f) * v.faces[j].dot(mesh.outward_normal(cell, j));
  }
  return s / mesh.cell_measure(cell);
}

double div_T(const Mesh& mesh, std::size_t cell, const HybridVelocity& v) {
  double s = 0.0;
  for (std::size_t j = 0; j < mesh.n_cell_faces(cell); ++j) {
    const std::size_t f = mesh.cell_faces(cell)[j];
    s += mesh.face_measure(f) * v.faces[f].dot(mesh.outward_normal(cell, j));
  }
  return s / mesh.cell_measure(cell);
}

CellField divergence(const Mesh& mesh, const HybridVelocity& v) {
  CellField d;
  d.values.resize(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) d[c] = div_T(mesh, c, v);
  return d;
}

AffineVelocity reconstruct_rT(const Mesh& mesh, std::size_t cell, const LocalVelocity& v) {
  return AffineVelocity{v.cell, grad_T(mesh, cell, v), mesh.cell_centroid(cell)};
}

double stab_sT(const Mesh&, const LocalOperators& ops, std::size_t cell, const LocalVelocity& w,
               const LocalVelocity& v) {
  const Eigen::MatrixXd& s = ops.cell(cell).stab;
  double total = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    total += component(w, comp).dot(s * component(v, comp));
  }
  return total;
}

double a_T(const Mesh&, const LocalOperators& ops, std::size_t cell, const LocalVelocity& w,
           const LocalVelocity& v) {
  const Eigen::MatrixXd& a = ops.cell(cell).a;
  double total = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    total += component(w, comp).dot(a * component(v, comp));
  }
  return total;
}

double a_h(const Mesh& mesh, const LocalOperators& ops, const HybridVelocity& w,
           const HybridVelocity& v) {
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    total += a_T(mesh, ops, c, restrict_to_cell(mesh, w, c), restrict_to_cell(mesh, v, c));
  }
  return total;
}

double norm_ah(const Mesh& mesh, const LocalOperators& ops, const HybridVelocity& v) {
  return std::sqrt(std::max(0.0, a_h(mesh, ops, v, v)));
}

VelocityDofs::VelocityDofs(const Mesh& mesh)
    : n_cells_(mesh.n_cells()), face_offset_(mesh.n_faces(), eliminated) {
  std::ptrdiff_t next = static_cast<std::ptrdiff_t>(2 * n_cells_);
  for (std::size_t f : mesh.interior_faces()) {
    face_offset_[f] = next;
    next += 2;
  }
  size_ = static_cast<std::size_t>(next);
}

Eigen::VectorXd VelocityDofs::pack(const HybridVelocity& v) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
  for (std::size_t c = 0; c < n_cells_; ++c) {
    x.segment<2>(cell(c)) = v.cells[c];
  }
  for (std::size_t f = 0; f < face_offset_.size(); ++f) {
    if (face_offset_[f] != eliminated) x.segment<2>(face_offset_[f]) = v.faces[f];
  }
  return x;
}

HybridVelocity VelocityDofs::unpack(const Mesh& mesh, const Eigen::VectorXd& x) const {
  HybridVelocity v = HybridVelocity::zero(mesh, true);
  for (std::size_t c = 0; c < n_cells_; ++c) {
    v.cells[c] = x.segment<2>(cell(c));
  }
  for (std::size_t f = 0; f < face_offset_.size(); ++f) {
    if (face_offset_[f] != eliminated) v.faces[f] = x.segment<2>(face_offset_[f]);
  }
  return v;
}

Eigen::SparseMatrix<double> assemble_ah(const Mesh& mesh, const LocalOperators& ops,
                                        const VelocityDofs& dofs) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::MatrixXd& a = ops.cell(c).a;
    const std::size_t n = mesh.n_cell_faces(c) + 1;
    for (std::size_t r = 0; r < n; ++r) {
      const std::ptrdiff_t gr = dofs.local_node(mesh, c, r);
      if (gr == VelocityDofs::eliminated) continue;
      for (std::size_t s = 0; s < n; ++s) {
        const std::ptrdiff_t gs = dofs.local_node(mesh, c, s);
        if (gs == VelocityDofs::eliminated) continue;
        const double value = a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
        triplets.emplace_back(gr, gs, value);
        triplets.emplace_back(gr + 1, gs + 1, value);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(dofs.size());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

double spacetime_norm(const Mesh& mesh, const LocalOperators& ops,
                      std::span<const HybridVelocity> series, double dt) {
  double s = 0.0;
  for (const HybridVelocity& v : series) {
    s += dt * a_h(mesh, ops, v, v);
  }
  return std::sqrt(s);
}

}  // namespace vdns
