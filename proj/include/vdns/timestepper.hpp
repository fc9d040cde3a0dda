#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdns/assembly.hpp"
#include "vdns/mesh.hpp"
#include "vdns/operators.hpp"
#include "vdns/spaces.hpp"

namespace vdns {

using SpaceTimeScalar = std::function<double(const Vec2&, double)>;
using SpaceTimeVector = std::function<Vec2(const Vec2&, double)>;

struct TimeConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  /// Extra fixed-point sweeps re-upwinding with the new velocity (0 = semi-implicit).
  int picard_iterations = 0;
  double picard_tolerance = 1e-10;
  int diagnostics_every = 1;
  double solver_tolerance = 1e-10;

  void validate() const;
  /// Number of steps; t_final must be a whole multiple of dt up to round-off.
  std::size_t n_steps() const;
};

/// Initial, boundary and forcing data of a simulation.
///
/// An empty `boundary_velocity` means u = 0 on the boundary; `boundary_density`
/// is only consulted on inflow faces.
struct ProblemData {
  ScalarFunction rho0;
  VectorFunction u0;
  SpaceTimeVector force;
  SpaceTimeVector boundary_velocity;
  SpaceTimeScalar boundary_density;
  double mu = 1.0;

  bool homogeneous() const { return !boundary_velocity; }
};

struct SimulationState {
  double t = 0.0;
  CellField rho;
  CellField sigma;
  HybridVelocity u;
  CellField p;
};

/// Runtime invariant failure; `cell` is no_cell for global quantities.
class InvariantViolation : public std::runtime_error {
public:
  InvariantViolation(std::size_t step, std::size_t cell, double value, const std::string& what);

  std::size_t step() const { return step_; }
  std::size_t cell() const { return cell_; }
  double value() const { return value_; }

private:
  std::size_t step_;
  std::size_t cell_;
  double value_;
};

/// Per-step energy and transport diagnostics.
struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double mass = 0.0;
  /// ||rho||_L2.
  double l2_rho = 0.0;
  /// ||sigma u||^2 + rho_lower j_h(u, u).
  double kinetic = 0.0;
  /// Accumulated mu ||u||_a,h^2 dt.
  double dissipation = 0.0;
  /// Accumulated int f.u dt.
  double forcing_work = 0.0;
  /// Accumulated dt |rho|_upw^2.
  double upwind_dissipation = 0.0;
  /// Accumulated dt times the net mass outflow through the boundary.
  double boundary_outflow = 0.0;
  double div_norm = 0.0;
};

struct EnergyLedger {
  std::vector<StepRecord> records;
};

std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const StepRecord& r);

/// Projected density, interpolated velocity (boundary values from `u0`), zero pressure.
SimulationState initialize(const Mesh& mesh, const ProblemData& data);

class TimeStepper {
public:
  TimeStepper(const Mesh& mesh, ProblemData data, TimeConfig config);

  const Mesh& mesh() const { return mesh_; }
  const LocalOperators& operators() const { return ops_; }
  const ProblemData& data() const { return data_; }
  const TimeConfig& config() const { return config_; }
  /// Weight of j_h in the unsteady term: min of the projected initial density.
  double rho_lower() const { return rho_lower_; }

  /// Inflow densities at time t indexed by face id (empty for homogeneous data).
  std::vector<double> inflow_density(double t) const;
  /// Boundary face means of the prescribed velocity at time t.
  HybridVelocity boundary_velocity(double t) const;

  CellField density_step(const SimulationState& state, double dt) const;

  struct MomentumResult {
    HybridVelocity u;
    CellField p;
    int picard_sweeps = 0;
    double solver_residual = 0.0;
  };
  MomentumResult momentum_step(const SimulationState& state, const CellField& rho_new, double dt);

  /// Step observer; called with the state after every completed step and once at t = 0.
  using Observer = std::function<void(std::size_t step, const SimulationState&)>;

  struct Result {
    SimulationState state;
    EnergyLedger ledger;
  };
  /// Density step then momentum step until t_final, checking invariants each step.
  Result run(const Observer& observer = {});

  /// Matrix of the last momentum solve (for dumps).
  const SparseSystem* last_momentum_system() const {
    return last_system_ ? &*last_system_ : nullptr;
  }
  void keep_last_system(bool keep) { keep_system_ = keep; }

private:
  StepRecord record(std::size_t step, const SimulationState& s, const StepRecord* previous,
                    double dt, const std::vector<Vec2>& force, double outflow) const;

  const Mesh& mesh_;
  LocalOperators ops_;
  SaddleLayout layout_;
  ProblemData data_;
  TimeConfig config_;
  double rho_lower_ = 0.0;
  SaddleSolver momentum_solver_;
  bool keep_system_ = false;
  std::optional<SparseSystem> last_system_;
};

}  // namespace vdns
