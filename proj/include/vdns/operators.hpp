#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "vdns/mesh.hpp"
#include "vdns/spaces.hpp"

namespace vdns {

/// Local hybrid DOFs of one cell: v_T followed by v_F in cell-face order.
struct LocalVelocity {
  Vec2 cell;
  std::vector<Vec2> faces;
};

LocalVelocity restrict_to_cell(const Mesh& mesh, const HybridVelocity& v, std::size_t cell);

/// Scalar local operators of one cell acting on (v_T, v_F1, ..., v_Fk).
///
/// Both velocity components are discretised independently, so the vector
/// operators are these blocks applied to each component.
struct CellOperators {
  /// 2 x (k+1): gradient of a scalar hybrid function, |T|^-1 sum_F |F| (v_F - v_T) n_TF.
  Eigen::MatrixXd grad;
  /// (k+1) x (k+1) stabilisation s_T.
  Eigen::MatrixXd stab;
  /// |T| grad^T grad + stab.
  Eigen::MatrixXd a;
  /// h_T sum_{F interior} |F| (e_F - e_T)(e_F - e_T)^T.
  Eigen::MatrixXd j;

  /// 1 x 2(k+1) divergence map on interleaved vector DOFs (x, y per node).
  Eigen::RowVectorXd div_map() const;
};

class LocalOperators {
public:
  explicit LocalOperators(const Mesh& mesh);

  const CellOperators& cell(std::size_t c) const { return cells_[c]; }
  std::size_t size() const { return cells_.size(); }

private:
  std::vector<CellOperators> cells_;
};

/// G_T v as a 2x2 matrix (row i is the gradient of component i).
Mat2 grad_T(const Mesh& mesh, std::size_t cell, const LocalVelocity& v);
Mat2 grad_T(const Mesh& mesh, std::size_t cell, const HybridVelocity& v);
double div_T(const Mesh& mesh, std::size_t cell, const LocalVelocity& v);
double div_T(const Mesh& mesh, std::size_t cell, const HybridVelocity& v);

/// D_h v for all cells.
CellField divergence(const Mesh& mesh, const HybridVelocity& v);

/// Affine reconstruction r_T v(x) = v_T + G_T v (x - x_T).
struct AffineVelocity {
  Vec2 value_at_centroid;
  Mat2 gradient;
  Vec2 centroid;

  Vec2 operator()(const Vec2& x) const { return value_at_centroid + gradient * (x - centroid); }
};

AffineVelocity reconstruct_rT(const Mesh& mesh, std::size_t cell, const LocalVelocity& v);

/// s_T(w, v) = h_T^-1 sum_F |F| pi_F(r_T w - w_F) . pi_F(r_T v - v_F).
double stab_sT(const Mesh& mesh, const LocalOperators& ops, std::size_t cell,
               const LocalVelocity& w, const LocalVelocity& v);

/// a_T(w, v) = |T| G_T w : G_T v + s_T(w, v).
double a_T(const Mesh& mesh, const LocalOperators& ops, std::size_t cell, const LocalVelocity& w,
           const LocalVelocity& v);

/// a_h(w, v) summed over cells, boundary face values included as given.
double a_h(const Mesh& mesh, const LocalOperators& ops, const HybridVelocity& w,
           const HybridVelocity& v);
double norm_ah(const Mesh& mesh, const LocalOperators& ops, const HybridVelocity& v);

/// Global index map for velocity DOFs of the zero-boundary space: cells
/// first (2 DOFs each), then interior faces (2 DOFs each).
class VelocityDofs {
public:
  explicit VelocityDofs(const Mesh& mesh);

  static constexpr std::ptrdiff_t eliminated = -1;

  std::size_t size() const { return size_; }
  std::size_t n_cell_dofs() const { return 2 * n_cells_; }
  /// First of the two DOFs of a cell.
  std::ptrdiff_t cell(std::size_t c) const { return static_cast<std::ptrdiff_t>(2 * c); }
  /// First of the two DOFs of a face, or `eliminated` on the boundary.
  std::ptrdiff_t face(std::size_t f) const { return face_offset_[f]; }
  /// Local node k of a cell (0 = cell, j+1 = face j) to its first global DOF.
  std::ptrdiff_t local_node(const Mesh& mesh, std::size_t c, std::size_t k) const {
    return k == 0 ? cell(c) : face(mesh.cell_faces(c)[k - 1]);
  }

  Eigen::VectorXd pack(const HybridVelocity& v) const;
  HybridVelocity unpack(const Mesh& mesh, const Eigen::VectorXd& x) const;

private:
  std::size_t n_cells_;
  std::vector<std::ptrdiff_t> face_offset_;
  std::size_t size_;
};

/// Global a_h on zero-boundary DOFs.
Eigen::SparseMatrix<double> assemble_ah(const Mesh& mesh, const LocalOperators& ops,
                                        const VelocityDofs& dofs);

/// (sum_n dt ||v^n||_a,h^2)^(1/2) over the given samples.
double spacetime_norm(const Mesh& mesh, const LocalOperators& ops,
                      std::span<const HybridVelocity> series, double dt);

}  // namespace vdns
