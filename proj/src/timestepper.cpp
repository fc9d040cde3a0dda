#include "vdns/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vdns/convection.hpp"
#include "vdns/quadrature.hpp"

namespace vdns {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

double kinetic_proxy(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                     double rho_lower) {
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    s += mesh.cell_measure(c) * rho[c] * u.cells[c].squaredNorm();
  }
  return s + rho_lower * jh(mesh, u, u);
}

CellField square_root(const CellField& rho) {
  CellField s = rho;
  for (double& v : s.values) v = std::sqrt(v);
  return s;
}

/// Net outflow sum_F rho_F q_F over boundary faces (boundary normals point outward).
double boundary_mass_outflow(const Mesh& mesh, const UpwindTrace& trace) {
  double s = 0.0;
  for (std::size_t f : mesh.boundary_faces()) s += trace.mass_flux(f);
  return s;
}

}  // namespace

void TimeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be positive");
  }
  if (picard_iterations < 0) throw std::invalid_argument("picard_iterations must be >= 0");
  if (diagnostics_every < 1) throw std::invalid_argument("diagnostics_every must be >= 1");
  n_steps();
}

std::size_t TimeConfig::n_steps() const {
  const double ratio = t_final / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-8 * std::max(1.0, ratio)) {
    throw std::invalid_argument("t_final must be a whole multiple of dt");
  }
  return static_cast<std::size_t>(n);
}

InvariantViolation::InvariantViolation(std::size_t step, std::size_t cell, double value,
                                       const std::string& what)
    : std::runtime_error([&] {
        std::string msg = "step " + std::to_string(step);
        if (cell != no_cell) msg += ", cell " + std::to_string(cell);
        msg += ": " + what + " (value " + format_value(value) + ")";
        return msg;
      }()),
      step_(step),
      cell_(cell),
      value_(value) {}

std::string diagnostics_csv_header() {
  return "step,t,rho_min,rho_max,mass,l2_rho,kinetic,dissipation,div_norm";
}

std::string diagnostics_csv_row(const StepRecord& r) {
  std::string row = std::to_string(r.step);
  for (double v : {r.t, r.rho_min, r.rho_max, r.mass, r.l2_rho, r.kinetic, r.dissipation,
                   r.div_norm}) {
    row += ',';
    row += format_value(v);
  }
  return row;
}

SimulationState initialize(const Mesh& mesh, const ProblemData& data) {
  if (!data.rho0 || !data.u0) {
    throw std::invalid_argument("initialize: initial density and velocity are required");
  }
  SimulationState s;
  s.rho = project_cell(mesh, data.rho0);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    if (!(s.rho[c] > 0.0)) {
      throw std::invalid_argument("initialize: nonpositive initial density " +
                                  format_value(s.rho[c]) + " in cell " + std::to_string(c));
    }
  }
  s.sigma = square_root(s.rho);
  s.u = interpolate_velocity(mesh, data.u0, data.homogeneous());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    double net = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const double q = mesh.face_measure(f) * s.u.faces[f].dot(mesh.outward_normal(c, j));
      net += q;
      scale += std::abs(q);
    }
    if (std::abs(net) > 1e-10 * scale) {
      throw std::invalid_argument("initialize: initial velocity is not divergence-free in cell " +
                                  std::to_string(c) + " (D_T = " +
                                  format_value(net / mesh.cell_measure(c)) + ")");
    }
  }
  s.p = CellField::constant(mesh, 0.0);
  return s;
}

TimeStepper::TimeStepper(const Mesh& mesh, ProblemData data, TimeConfig config)
    : mesh_(mesh),
      ops_(mesh),
      layout_(mesh),
      data_(std::move(data)),
      config_(config),
      momentum_solver_(layout_, config.solver_tolerance) {
  config_.validate();
  if (!(data_.mu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!data_.homogeneous() && !data_.boundary_density) {
    throw std::invalid_argument("boundary velocity given without boundary density");
  }
  rho_lower_ = project_cell(mesh_, data_.rho0).min();
}

std::vector<double> TimeStepper::inflow_density(double t) const {
  if (data_.homogeneous()) return {};
  std::vector<double> out(mesh_.n_faces(), 0.0);
  for (std::size_t f : mesh_.boundary_faces()) {
    out[f] = face_mean(mesh_, f, [&](const Vec2& x) { return data_.boundary_density(x, t); });
  }
  return out;
}

HybridVelocity TimeStepper::boundary_velocity(double t) const {
  HybridVelocity v = HybridVelocity::zero(mesh_, data_.homogeneous());
  if (data_.homogeneous()) return v;
  for (std::size_t f : mesh_.boundary_faces()) {
    v.faces[f] = face_mean(mesh_, f, [&](const Vec2& x) { return data_.boundary_velocity(x, t); });
  }
  return v;
}

CellField TimeStepper::density_step(const SimulationState& state, double dt) const {
  const std::vector<double> inflow = inflow_density(state.t + dt);
  const SparseSystem sys = assemble_density_transport(mesh_, state.u, state.rho, dt, inflow);
  LinearSolver solver(config_.solver_tolerance);
  const Eigen::VectorXd x = solver.solve(sys);
  CellField rho;
  rho.values.assign(x.data(), x.data() + x.size());
  return rho;
}

TimeStepper::MomentumResult TimeStepper::momentum_step(const SimulationState& state,
                                                       const CellField& rho_new, double dt) {
  const double t_new = state.t + dt;
  const CellField sigma_new = square_root(rho_new);
  const std::vector<double> inflow = inflow_density(t_new);
  const HybridVelocity boundary = boundary_velocity(t_new);
  std::vector<Vec2> force;
  if (data_.force) {
    force = cell_force_integrals(mesh_, [&](const Vec2& x) { return data_.force(x, t_new); });
  }

  SaddleInputs in;
  in.rho_new = &rho_new;
  in.sigma_new = &sigma_new;
  in.sigma_old = &state.sigma;
  in.u_old = &state.u;
  in.force_integrals = force;
  in.boundary_velocity = data_.homogeneous() ? nullptr : &boundary;
  in.dt = dt;
  in.mu = data_.mu;
  in.rho_lower = rho_lower_;

  MomentumResult out;
  HybridVelocity transport_velocity = state.u;
  for (int sweep = 0; sweep <= config_.picard_iterations; ++sweep) {
    const UpwindTrace trace = upwind_trace(mesh_, rho_new, transport_velocity, inflow);
    in.transport = &trace;
    SparseSystem sys = assemble_saddle(mesh_, ops_, layout_, in);
    const Eigen::VectorXd x = momentum_solver_.solve(sys);
    out.solver_residual = momentum_solver_.last_relative_residual();
    out.picard_sweeps = sweep;

    out.u = layout_.velocity.unpack(mesh_, x.head(static_cast<Eigen::Index>(layout_.n_velocity())));
    out.u.homogeneous_boundary = data_.homogeneous();
    for (std::size_t f : mesh_.boundary_faces()) out.u.faces[f] = boundary.faces[f];
    out.p.values.resize(mesh_.n_cells());
    for (std::size_t c = 0; c < mesh_.n_cells(); ++c) out.p[c] = x(layout_.pressure(c));
    if (keep_system_) last_system_ = std::move(sys);

    if (sweep > 0) {
      const double change = std::sqrt(l2_norm_squared(mesh_, out.u - transport_velocity));
      const double size = std::sqrt(l2_norm_squared(mesh_, out.u));
      if (change <= config_.picard_tolerance * std::max(size, 1e-300)) break;
    }
    transport_velocity = out.u;
  }
  return out;
}

StepRecord TimeStepper::record(std::size_t step, const SimulationState& s,
                               const StepRecord* previous, double dt,
                               const std::vector<Vec2>& force, double outflow) const {
  StepRecord r;
  r.step = step;
  r.t = s.t;
  r.rho_min = s.rho.min();
  r.rho_max = s.rho.max();
  r.mass = integral(mesh_, s.rho);
  r.l2_rho = std::sqrt(l2_norm_squared(mesh_, s.rho));
  r.kinetic = kinetic_proxy(mesh_, s.rho, s.u, rho_lower_);
  r.div_norm = std::sqrt(l2_norm_squared(mesh_, divergence(mesh_, s.u)));
  if (previous) {
    const double a = norm_ah(mesh_, ops_, s.u);
    r.dissipation = previous->dissipation + data_.mu * a * a * dt;
    double work = 0.0;
    for (std::size_t c = 0; c < force.size(); ++c) work += force[c].dot(s.u.cells[c]);
    r.forcing_work = previous->forcing_work + work * dt;
    r.boundary_outflow = previous->boundary_outflow + outflow * dt;
    r.upwind_dissipation = previous->upwind_dissipation;
  }
  return r;
}

TimeStepper::Result TimeStepper::run(const Observer& observer) {
  const std::size_t n_steps = config_.n_steps();
  const double dt = config_.dt;
  const bool energy_check = !data_.force && data_.homogeneous();

  Result result;
  SimulationState& state = result.state;
  state = initialize(mesh_, data_);
  if (observer) observer(0, state);

  double lo = state.rho.min();
  double hi = state.rho.max();
  const double mass0 = integral(mesh_, state.rho);

  StepRecord current = record(0, state, nullptr, dt, {}, 0.0);
  result.ledger.records.push_back(current);

  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double t_new = static_cast<double>(n) * dt;
    const double step_dt = t_new - state.t;
    const std::vector<double> inflow = inflow_density(t_new);

    // Bounds for this step: old range together with the inflow data.
    double step_lo = state.rho.min();
    double step_hi = state.rho.max();
    for (std::size_t f : mesh_.boundary_faces()) {
      if (inflow.empty()) break;
      const double q = mesh_.face_measure(f) * state.u.faces[f].dot(mesh_.face_normal(f));
      if (q < 0.0) {
        step_lo = std::min(step_lo, inflow[f]);
        step_hi = std::max(step_hi, inflow[f]);
      }
    }
    lo = std::min(lo, step_lo);
    hi = std::max(hi, step_hi);

    CellField rho_new = density_step(state, step_dt);
    const double tol = 1e-10 * hi;
    for (std::size_t c = 0; c < mesh_.n_cells(); ++c) {
      if (!(rho_new[c] >= step_lo - tol && rho_new[c] <= step_hi + tol)) {
        throw InvariantViolation(n, c, rho_new[c], "density left the admissible range");
      }
    }

    const UpwindTrace density_trace = upwind_trace(mesh_, rho_new, state.u, inflow);
    const double outflow = boundary_mass_outflow(mesh_, density_trace);
    const double upw = upwind_seminorm(mesh_, state.u, rho_new);
    if (data_.homogeneous()) {
      const double before = l2_norm_squared(mesh_, state.rho);
      const double after = l2_norm_squared(mesh_, rho_new) + 2.0 * step_dt * upw * upw;
      if (after > before * (1.0 + 1e-10)) {
        throw InvariantViolation(n, no_cell, after - before, "density L2 norm increased");
      }
    }

    const double kinetic_old = current.kinetic;
    MomentumResult m = momentum_step(state, rho_new, step_dt);

    state.t = t_new;
    state.sigma = square_root(rho_new);
    state.rho = std::move(rho_new);
    state.u = std::move(m.u);
    state.p = std::move(m.p);

    std::vector<Vec2> force;
    if (data_.force) {
      force = cell_force_integrals(mesh_, [&](const Vec2& x) { return data_.force(x, t_new); });
    }
    StepRecord next = record(n, state, &current, step_dt, force, outflow);
    next.upwind_dissipation += step_dt * upw * upw;

    const double balance = next.mass - mass0 + next.boundary_outflow;
    if (std::abs(balance) > 1e-10 * mass0) {
      throw InvariantViolation(n, no_cell, balance, "mass balance violated");
    }
    const double a = norm_ah(mesh_, ops_, state.u);
    if (next.div_norm > 1e-8 * a) {
      throw InvariantViolation(n, no_cell, next.div_norm, "discrete divergence not zero");
    }
    double p_mean = 0.0;
    double p_l1 = 0.0;
    for (std::size_t c = 0; c < mesh_.n_cells(); ++c) {
      p_mean += mesh_.cell_measure(c) * state.p[c];
      p_l1 += mesh_.cell_measure(c) * std::abs(state.p[c]);
    }
    if (std::abs(p_mean) > 1e-10 * p_l1) {
      throw InvariantViolation(n, no_cell, p_mean, "pressure mean not zero");
    }
    if (energy_check && next.kinetic > kinetic_old * (1.0 + 1e-10)) {
      throw InvariantViolation(n, no_cell, next.kinetic - kinetic_old, "kinetic energy increased");
    }
    for (double v : {next.kinetic, next.dissipation, next.forcing_work, next.l2_rho}) {
      if (!std::isfinite(v)) throw InvariantViolation(n, no_cell, v, "non-finite diagnostic");
    }

    current = next;
    if (n % static_cast<std::size_t>(config_.diagnostics_every) == 0 || n == n_steps) {
      result.ledger.records.push_back(current);
    }
    if (observer) observer(n, state);
  }
  return result;
}

}  // namespace vdns
