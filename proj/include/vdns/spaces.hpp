#pragma once

#include <functional>
#include <vector>

#include "vdns/mesh.hpp"

namespace vdns {

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Lowest-order hybrid velocity: one 2-vector per cell and one per face.
///
/// With `homogeneous_boundary` set the field lives in the subspace with zero
/// boundary face values; `enforce_boundary` restores that invariant.
struct HybridVelocity {
  std::vector<Vec2> cells;
  std::vector<Vec2> faces;
  bool homogeneous_boundary = true;

  static HybridVelocity zero(const Mesh& mesh, bool homogeneous = true);

  void enforce_boundary(const Mesh& mesh);
  /// True when every boundary face value is exactly zero.
  bool vanishes_on_boundary(const Mesh& mesh) const;

  HybridVelocity& operator+=(const HybridVelocity& other);
  HybridVelocity& operator-=(const HybridVelocity& other);
  HybridVelocity& operator*=(double s);
};

HybridVelocity operator+(HybridVelocity a, const HybridVelocity& b);
HybridVelocity operator-(HybridVelocity a, const HybridVelocity& b);
HybridVelocity operator*(double s, HybridVelocity a);

/// Piecewise-constant scalar field (density, pressure, sqrt-density).
struct CellField {
  std::vector<double> values;

  static CellField constant(const Mesh& mesh, double value);

  double operator[](std::size_t c) const { return values[c]; }
  double& operator[](std::size_t c) { return values[c]; }
  std::size_t size() const { return values.size(); }

  double min() const;
  double max() const;
};

/// Cell and face means of `field`; boundary faces zeroed when `homogeneous`.
HybridVelocity interpolate_velocity(const Mesh& mesh, const VectorFunction& field,
                                    bool homogeneous);
/// Cell means of `field`.
CellField project_cell(const Mesh& mesh, const ScalarFunction& field);

double integral(const Mesh& mesh, const CellField& q);
double l2_norm_squared(const Mesh& mesh, const CellField& q);
/// ||v_h||^2 over the cell values only.
double l2_norm_squared(const Mesh& mesh, const HybridVelocity& v);

/// (sum_T h_T^-1 sum_F |F| |v_F - v_T|^2)^(1/2); a norm only on zero-boundary fields.
double norm_1h(const Mesh& mesh, const HybridVelocity& v);

/// Face-penalty form sum_T h_T sum_{F interior} |F| (w_F - w_T).(v_F - v_T).
double jh(const Mesh& mesh, const HybridVelocity& w, const HybridVelocity& v);

/// sum_T |T| w_T.v_T + jh(w, v).
double inner_0h(const Mesh& mesh, const HybridVelocity& w, const HybridVelocity& v);
double norm_0h(const Mesh& mesh, const HybridVelocity& v);

/// Left-hand side of the discrete Sobolev inequality for exponent p >= 1.
double sobolev_lhs(const Mesh& mesh, const HybridVelocity& v, double p);

/// Cell-wise dot product u_T . v_T.
CellField dot_cells(const HybridVelocity& u, const HybridVelocity& v);

}  // namespace vdns
