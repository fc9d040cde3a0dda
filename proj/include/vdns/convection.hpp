#pragma once

#include <span>
#include <vector>

#include "vdns/mesh.hpp"
#include "vdns/spaces.hpp"

namespace vdns {

/// Upwind face densities and face fluxes of a velocity field.
///
/// flux[f] = |F| w_F . n_F. density[f] is the value of the cell T with
/// w_F . n_TF >= 0; on a zero-flux interior face the owner is taken. On
/// boundary faces the owner's value is used on outflow and the supplied
/// inflow value on inflow.
struct UpwindTrace {
  std::vector<double> density;
  std::vector<double> flux;

  /// rho_F * q_F along n_F.
  double mass_flux(std::size_t f) const { return density[f] * flux[f]; }
};

/// `inflow` holds per-face boundary densities (indexed by face id) and may be
/// empty when the velocity vanishes on the boundary; a nonzero inflow flux
/// without data throws std::invalid_argument.
UpwindTrace upwind_trace(const Mesh& mesh, const CellField& rho, const HybridVelocity& w,
                         std::span<const double> inflow = {});

/// c_h((rho w)_h, v, z) with the first argument built from the upwind trace.
double c_h(const Mesh& mesh, const UpwindTrace& trace, const HybridVelocity& v,
           const HybridVelocity& z);
double c_h(const Mesh& mesh, const CellField& rho, const HybridVelocity& w,
           const HybridVelocity& v, const HybridVelocity& z);

/// Sum of |per-face contributions| of c_h; the natural scale for round-off checks.
double c_h_scale(const Mesh& mesh, const UpwindTrace& trace, const HybridVelocity& v,
                 const HybridVelocity& z);

/// d_h(w, eta, chi) = sum_T sum_F eta_F(w) |F| (w_F . n_TF) chi_T.
double d_h(const Mesh& mesh, const HybridVelocity& w, const CellField& eta, const CellField& chi,
           std::span<const double> inflow = {});

/// Jump/average form over interior faces; equals d_h when D_h w = 0 and w
/// vanishes on the boundary. Jumps are [z] = z_T - z_T' with n_TF = n_F (owner minus neighbour).
double d_h_jump_form(const Mesh& mesh, const HybridVelocity& w, const CellField& eta,
                     const CellField& chi);

/// (1/2 sum_{F interior} |F| |w_F . n_F| [eta]^2)^(1/2).
double upwind_seminorm(const Mesh& mesh, const HybridVelocity& w, const CellField& eta);

struct IbpResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs| / (1 + |lhs|)
};

/// Evaluates both sides of the discrete integration-by-parts identity
/// c_h((rho u)_h, u, v) + 1/2 d_h(u, rho, u.v) = -int rho u x u : G_h v + three face sums.
IbpResidual discrete_ibp_check(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const HybridVelocity& v);

}  // namespace vdns
