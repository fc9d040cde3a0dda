#include "vdns/convection.hpp"

#include <cmath>
#include <stdexcept>

#include "vdns/operators.hpp"

namespace vdns {

UpwindTrace upwind_trace(const Mesh& mesh, const CellField& rho, const HybridVelocity& w,
                         std::span<const double> inflow) {
  UpwindTrace t;
  t.density.resize(mesh.n_faces());
  t.flux.resize(mesh.n_faces());
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.face(f);
    const double q = mesh.face_measure(f) * w.faces[f].dot(mesh.face_normal(f));
    t.flux[f] = q;
    if (face.is_boundary()) {
      if (q < 0.0) {
        if (inflow.empty()) {
          throw std::invalid_argument("upwind_trace: inflow through boundary face " +
                                      std::to_string(f) + " without boundary density");
        }
        t.density[f] = inflow[f];
      } else {
        t.density[f] = rho[face.owner];
      }
    } else {
      t.density[f] = (q >= 0.0) ? rho[face.owner] : rho[face.neighbor];
    }
  }
  return t;
}

double c_h(const Mesh& mesh, const UpwindTrace& trace, const HybridVelocity& v,
           const HybridVelocity& z) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const double m = mesh.face_sign(c, j) * trace.mass_flux(f);
      s += m * (v.faces[f].dot(z.cells[c]) - v.cells[c].dot(z.faces[f]));
    }
  }
  return 0.5 * s;
}

double c_h(const Mesh& mesh, const CellField& rho, const HybridVelocity& w,
           const HybridVelocity& v, const HybridVelocity& z) {
  return c_h(mesh, upwind_trace(mesh, rho, w), v, z);
}

double c_h_scale(const Mesh& mesh, const UpwindTrace& trace, const HybridVelocity& v,
                 const HybridVelocity& z) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const double m = std::abs(trace.mass_flux(f));
      s += m * (std::abs(v.faces[f].dot(z.cells[c])) + std::abs(v.cells[c].dot(z.faces[f])));
    }
  }
  return 0.5 * s;
}

double d_h(const Mesh& mesh, const HybridVelocity& w, const CellField& eta, const CellField& chi,
           std::span<const double> inflow) {
  const UpwindTrace t = upwind_trace(mesh, eta, w, inflow);
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      s += mesh.face_sign(c, j) * t.mass_flux(f) * chi[c];
    }
  }
  return s;
}

double d_h_jump_form(const Mesh& mesh, const HybridVelocity& w, const CellField& eta,
                     const CellField& chi) {
  double s = 0.0;
  for (std::size_t f : mesh.interior_faces()) {
    const Face& face = mesh.face(f);
    const double q = mesh.face_measure(f) * w.faces[f].dot(mesh.face_normal(f));
    const double jump_eta = eta[face.owner] - eta[face.neighbor];
    const double jump_chi = chi[face.owner] - chi[face.neighbor];
    const double avg_chi = 0.5 * (chi[face.neighbor] + chi[face.owner]);
    s += -q * jump_eta * avg_chi + 0.5 * std::abs(q) * jump_eta * jump_chi;
  }
  return s;
}

double upwind_seminorm(const Mesh& mesh, const HybridVelocity& w, const CellField& eta) {
  double s = 0.0;
  for (std::size_t f : mesh.interior_faces()) {
    const Face& face = mesh.face(f);
    const double q = mesh.face_measure(f) * w.faces[f].dot(mesh.face_normal(f));
    const double jump = eta[face.neighbor] - eta[face.owner];
    s += std::abs(q) * jump * jump;
  }
  return std::sqrt(0.5 * s);
}

IbpResidual discrete_ibp_check(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const HybridVelocity& v) {
  const UpwindTrace trace = upwind_trace(mesh, rho, u);
  IbpResidual r;
  r.lhs = c_h(mesh, trace, u, v) + 0.5 * d_h(mesh, u, rho, dot_cells(u, v));

  double volume = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Mat2 g = grad_T(mesh, c, v);
    volume -= mesh.cell_measure(c) * rho[c] * u.cells[c].dot(g * u.cells[c]);
  }
  double face_velocity = 0.0;
  double cell_velocity = 0.0;
  double upwinding = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Vec2& ut = u.cells[c];
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const Vec2 n = mesh.outward_normal(c, j);
      const double len = mesh.face_measure(f);
      const Vec2& uf = u.faces[f];
      const Vec2 dv = v.cells[c] - v.faces[f];
      face_velocity += len * trace.density[f] * uf.dot(n) * (uf - ut).dot(dv);
      cell_velocity += len * rho[c] * (uf - ut).dot(n) * ut.dot(dv);
      upwinding += len * (trace.density[f] - rho[c]) * uf.dot(n) * ut.dot(dv);
    }
  }
  r.rhs = volume + 0.5 * face_velocity + cell_velocity + upwinding;
  r.residual = std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs));
  return r;
}

}  // namespace vdns
