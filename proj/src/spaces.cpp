#include "vdns/spaces.hpp"

#include <algorithm>
#include <cmath>

#include "vdns/quadrature.hpp"

namespace vdns {

HybridVelocity HybridVelocity::zero(const Mesh& mesh, bool homogeneous) {
  HybridVelocity v;
  v.cells.assign(mesh.n_cells(), Vec2::Zero());
  v.faces.assign(mesh.n_faces(), Vec2::Zero());
  v.homogeneous_boundary = homogeneous;
  return v;
}

void HybridVelocity::enforce_boundary(const Mesh& mesh) {
  for (std::size_t f : mesh.boundary_faces()) {
    faces[f].setZero();
  }
  homogeneous_boundary = true;
}

bool HybridVelocity::vanishes_on_boundary(const Mesh& mesh) const {
  return std::all_of(mesh.boundary_faces().begin(), mesh.boundary_faces().end(),
                     [&](std::size_t f) { return faces[f].x() == 0.0 && faces[f].y() == 0.0; });
}

HybridVelocity& HybridVelocity::operator+=(const HybridVelocity& other) {
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += other.cells[i];
  for (std::size_t i = 0; i < faces.size(); ++i) faces[i] += other.faces[i];
  homogeneous_boundary = homogeneous_boundary && other.homogeneous_boundary;
  return *this;
}

HybridVelocity& HybridVelocity::operator-=(const HybridVelocity& other) {
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] -= other.cells[i];
  for (std::size_t i = 0; i < faces.size(); ++i) faces[i] -= other.faces[i];
  homogeneous_boundary = homogeneous_boundary && other.homogeneous_boundary;
  return *this;
}

HybridVelocity& HybridVelocity::operator*=(double s) {
  for (auto& c : cells) c *= s;
  for (auto& f : faces) f *= s;
  return *this;
}

HybridVelocity operator+(HybridVelocity a, const HybridVelocity& b) { return a += b; }
HybridVelocity operator-(HybridVelocity a, const HybridVelocity& b) { return a -= b; }
HybridVelocity operator*(double s, HybridVelocity a) { return a *= s; }

CellField CellField::constant(const Mesh& mesh, double value) {
  return CellField{std::vector<double>(mesh.n_cells(), value)};
}

double CellField::min() const { return *std::min_element(values.begin(), values.end()); }
double CellField::max() const { return *std::max_element(values.begin(), values.end()); }

HybridVelocity interpolate_velocity(const Mesh& mesh, const VectorFunction& field,
                                    bool homogeneous) {
  HybridVelocity v = HybridVelocity::zero(mesh, homogeneous);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    v.cells[c] = cell_mean(mesh, c, field);
  }
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    if (homogeneous && mesh.is_boundary(f)) continue;
    v.faces[f] = face_mean(mesh, f, field);
  }
  return v;
}

CellField project_cell(const Mesh& mesh, const ScalarFunction& field) {
  CellField q;
  q.values.resize(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    q.values[c] = cell_mean(mesh, c, field);
  }
  return q;
}

double integral(const Mesh& mesh, const CellField& q) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) s += mesh.cell_measure(c) * q[c];
  return s;
}

double l2_norm_squared(const Mesh& mesh, const CellField& q) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) s += mesh.cell_measure(c) * q[c] * q[c];
  return s;
}

double l2_norm_squared(const Mesh& mesh, const HybridVelocity& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    s += mesh.cell_measure(c) * v.cells[c].squaredNorm();
  }
  return s;
}

double norm_1h(const Mesh& mesh, const HybridVelocity& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    double local = 0.0;
    for (std::size_t f : mesh.cell_faces(c)) {
      local += mesh.face_measure(f) * (v.faces[f] - v.cells[c]).squaredNorm();
    }
    s += local / mesh.cell_diameter(c);
  }
  return std::sqrt(s);
}

double jh(const Mesh& mesh, const HybridVelocity& w, const HybridVelocity& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    double local = 0.0;
    for (std::size_t f : mesh.cell_faces(c)) {
      if (mesh.is_boundary(f)) continue;
      local += mesh.face_measure(f) * (w.faces[f] - w.cells[c]).dot(v.faces[f] - v.cells[c]);
    }
    s += mesh.cell_diameter(c) * local;
  }
  return s;
}

double inner_0h(const Mesh& mesh, const HybridVelocity& w, const HybridVelocity& v) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    s += mesh.cell_measure(c) * w.cells[c].dot(v.cells[c]);
  }
  return s + jh(mesh, w, v);
}

double norm_0h(const Mesh& mesh, const HybridVelocity& v) {
  return std::sqrt(std::max(0.0, inner_0h(mesh, v, v)));
}

double sobolev_lhs(const Mesh& mesh, const HybridVelocity& v, double p) {
  double cells = 0.0;
  double cell_traces = 0.0;
  double faces = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double hT = mesh.cell_diameter(c);
    const double vt = std::pow(v.cells[c].norm(), p);
    cells += mesh.cell_measure(c) * vt;
    cell_traces += hT * mesh.cell_perimeter(c) * vt;
    for (std::size_t f : mesh.cell_faces(c)) {
      faces += hT * mesh.face_measure(f) * std::pow(v.faces[f].norm(), p);
    }
  }
  return std::pow(cells + cell_traces + faces, 1.0 / p);
}

CellField dot_cells(const HybridVelocity& u, const HybridVelocity& v) {
  CellField q;
  q.values.resize(u.cells.size());
  for (std::size_t c = 0; c < u.cells.size(); ++c) q.values[c] = u.cells[c].dot(v.cells[c]);
  return q;
}

}  // namespace vdns
