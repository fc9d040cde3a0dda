#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vdns/mesh.hpp"
#include "vdns/operators.hpp"
#include "vdns/spaces.hpp"
#include "vdns/timestepper.hpp"

namespace vdns {

/// Closed-form solution of the variable-density Navier-Stokes equations.
struct ManufacturedCase {
  std::string name;
  SpaceTimeScalar rho;
  SpaceTimeVector u;
  SpaceTimeScalar p;
  SpaceTimeVector f;
  Rectangle domain;
  double t_final = 1.0;
  double mu = 1.0;

  /// Initial data from t = 0, the exact velocity as boundary data and the
  /// exact density as inflow data.
  ProblemData problem_data() const;
};

/// rho = 2 + x cos(sin t) + y sin(sin t), u = (-y, x) cos t, p = 0 on the unit square.
ManufacturedCase guermond_case(double mu);

/// Homogeneous problems without forcing or exact solution, for demos and stability checks:
/// "zero" (rho = 1, u = 0), "bump" (rho = 1, u0 = 100 curl psi with the bubble
/// streamfunction psi) and "stratified" (rho0 = 2 + tanh((y - 1/2) / 0.1), u0 as in "bump").
ProblemData demo_problem(const std::string& name, double mu);

/// Pointwise residuals of the PDE system evaluated by central differences.
struct PdeResidual {
  Vec2 momentum = Vec2::Zero();
  double divergence = 0.0;
  double transport = 0.0;
};

/// Steps: `h` for first derivatives, `h2` for the Laplacian.
PdeResidual pde_residual(const ManufacturedCase& c, const Vec2& x, double t, double h = 1e-6,
                         double h2 = 1e-4);

struct PdeResidualSummary {
  double momentum = 0.0;
  double divergence = 0.0;
  double transport = 0.0;
};

/// Max residuals over random points of the domain times [0, t_final].
PdeResidualSummary sample_pde_residual(const ManufacturedCase& c, std::size_t samples,
                                       std::uint64_t seed);

/// max_n [ ||e^n||^2 + sum_{m<=n} dt |e^m|_{u^m,upw}^2 ]^(1/2).
/// errors[n] and velocities[n] belong to t^n, n = 0..N; index 0 is not summed.
double density_error(const Mesh& mesh, std::span<const CellField> errors,
                     std::span<const HybridVelocity> velocities, double dt);

/// [ rho_lower max_n ||e^n||_0,h^2 + mu sum_{n>=1} dt ||e^n||_a,h^2 ]^(1/2).
double velocity_error(const Mesh& mesh, const LocalOperators& ops,
                      std::span<const HybridVelocity> errors, double dt, double mu,
                      double rho_lower);

/// Streaming version of density_error / velocity_error against a manufactured case.
class ErrorTracker {
public:
  ErrorTracker(const Mesh& mesh, const LocalOperators& ops, const ManufacturedCase& c, double dt,
               double rho_lower);

  void sample(std::size_t step, const SimulationState& state);

  double density_error() const;
  double velocity_error() const;

private:
  const Mesh& mesh_;
  const LocalOperators& ops_;
  const ManufacturedCase& case_;
  double dt_;
  double rho_lower_;
  double density_sum_ = 0.0;
  double density_max_ = 0.0;
  double velocity_max_ = 0.0;
  double velocity_sum_ = 0.0;
};

/// rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1}); nullopt when an error is not positive.
std::vector<std::optional<double>> eoc(std::span<const double> errors, std::span<const double> hs);

/// d_h(u_h, rho_h, pi_h phi) + int rho_h u_h . grad phi.
double dh_consistency_residual(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const ScalarFunction& phi);

/// c_h((rho u)_h, u_h, I_h v) + 1/2 d_h(u_h, rho_h, u_h . I_h v) + int rho_h u_h x u_h : G_h I_h v.
double ch_consistency_residual(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const VectorFunction& v);

struct ConsistencyStudy {
  std::vector<double> h;
  std::vector<double> residual;
  std::vector<std::optional<double>> rates;
};

/// A streamfunction together with its curl (d psi/dy, -d psi/dx).
struct StreamFunction {
  ScalarFunction psi;
  VectorFunction curl;
};

/// psi = x^2 (1-x)^2 y^2 (1-y)^2, vanishing with its gradient on the unit square boundary.
StreamFunction bubble_streamfunction();

/// I_h curl psi with normal face components taken exactly from vertex values of
/// psi, so that D_h of the result vanishes to round-off. Boundary faces are
/// zeroed when `homogeneous`.
HybridVelocity interpolate_curl(const Mesh& mesh, const StreamFunction& s, bool homogeneous = true);

/// Frozen data per level: rho_h = pi_h rho, u_h = I_h curl psi.
ConsistencyStudy consistency_rate_dh(std::span<const Mesh> levels, const ScalarFunction& rho,
                                     const StreamFunction& stream, const ScalarFunction& phi);
ConsistencyStudy consistency_rate_ch(std::span<const Mesh> levels, const ScalarFunction& rho,
                                     const StreamFunction& stream, const VectorFunction& v);

/// Random element of Z_h: random vertex streamfunction (zero on boundary
/// vertices), random tangential face components and random cell values.
HybridVelocity random_divergence_free(const Mesh& mesh, std::mt19937_64& rng);
/// Random element of U_h,0.
HybridVelocity random_hybrid(const Mesh& mesh, std::mt19937_64& rng);
CellField random_cell_field(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi);

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
};

/// Exact range of norm_ah / norm_1h over U_h,0 (generalised eigenvalues).
RatioRange ah_to_1h_range(const Mesh& mesh, const LocalOperators& ops);
/// Exact max of sobolev_lhs(v, 2) / norm_1h(v) over U_h,0.
double sobolev2_ratio_max(const Mesh& mesh);
/// Max of sobolev_lhs(v, p) / norm_1h(v) over interpolants of smooth random fields.
double sobolev_ratio_sampled(const Mesh& mesh, double p, std::size_t samples, std::uint64_t seed);

}  // namespace vdns
