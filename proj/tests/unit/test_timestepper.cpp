#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vdns/timestepper.hpp"
#include "vdns/verify.hpp"

using namespace vdns;

namespace {

ProblemData constant_problem(double rho) {
  ProblemData d;
  d.rho0 = [rho](const Vec2&) { return rho; };
  d.u0 = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
  return d;
}

TimeConfig short_run(double dt, double t_final) {
  TimeConfig c;
  c.dt = dt;
  c.t_final = t_final;
  return c;
}

}  // namespace

TEST(Initialize, GuermondInitialData) {
  const Mesh m = build_triangular(4);
  const SimulationState s = initialize(m, guermond_case(1.0).problem_data());
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    const Vec2 x = m.cell_centroid(c);
    EXPECT_NEAR(s.rho[c], 2.0 + x.x(), 1e-13);
    EXPECT_NEAR(s.sigma[c], std::sqrt(2.0 + x.x()), 1e-13);
    EXPECT_LE((s.u.cells[c] - Vec2(-x.y(), x.x())).norm(), 1e-13);
    EXPECT_EQ(s.p[c], 0.0);
  }
  EXPECT_EQ(s.t, 0.0);
}

TEST(Initialize, ConstantDataAndBubbleVelocity) {
  const Mesh m = build_cartesian(4, 4);
  const SimulationState s = initialize(m, constant_problem(1.5));
  for (double v : s.rho.values) EXPECT_DOUBLE_EQ(v, 1.5);
  for (const Vec2& f : s.u.faces) EXPECT_EQ(f.norm(), 0.0);

  const SimulationState b = initialize(m, demo_problem("bump", 1.0));
  for (double v : divergence(m, b.u).values) EXPECT_LE(std::abs(v), 1e-10);
  EXPECT_TRUE(b.u.vanishes_on_boundary(m));
}

TEST(Initialize, RejectsNonpositiveDensityAndDivergentVelocity) {
  const Mesh m = build_cartesian(3, 3);
  ProblemData d = constant_problem(1.0);
  d.rho0 = [](const Vec2& x) { return x.x() - 0.5; };
  EXPECT_THROW(initialize(m, d), std::invalid_argument);
  ProblemData e = constant_problem(1.0);
  e.u0 = [](const Vec2& x) -> Vec2 { return Vec2(x.x() * x.x(), 0.0); };
  EXPECT_THROW(initialize(m, e), std::invalid_argument);
  ProblemData missing;
  EXPECT_THROW(initialize(m, missing), std::invalid_argument);
}

TEST(TimeConfig, ValidationAndStepCount) {
  EXPECT_EQ(short_run(0.1, 1.0).n_steps(), 10u);
  EXPECT_EQ(short_run(1e-3 / 8.0, 0.2).n_steps(), 1600u);
  EXPECT_THROW(short_run(0.0, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(short_run(0.1, -1.0).validate(), std::invalid_argument);
  EXPECT_THROW(short_run(0.3, 1.0).validate(), std::invalid_argument);
  TimeConfig c = short_run(0.1, 1.0);
  c.picard_iterations = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.picard_iterations = 0;
  c.diagnostics_every = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(TimeStepper, DensityStepWithoutFlowOrWithUniformDensity) {
  const Mesh m = build_triangular(4);
  std::mt19937_64 rng(3);
  const TimeStepper stepper(m, constant_problem(1.0), short_run(0.1, 1.0));
  SimulationState s = initialize(m, constant_problem(1.0));
  s.rho = random_cell_field(m, rng, 1.0, 2.0);
  const CellField still = stepper.density_step(s, 0.1);
  for (std::size_t c = 0; c < m.n_cells(); ++c) EXPECT_NEAR(still[c], s.rho[c], 1e-14);

  s.rho = CellField::constant(m, 1.25);
  s.u = random_divergence_free(m, rng);
  const CellField uniform = stepper.density_step(s, 0.1);
  for (double v : uniform.values) EXPECT_NEAR(v, 1.25, 1e-13);
}

TEST(TimeStepper, ZeroDataStaysZero) {
  const Mesh m = build_cartesian(4, 4);
  TimeStepper stepper(m, demo_problem("zero", 1.0), short_run(0.1, 0.5));
  const auto result = stepper.run();
  for (const Vec2& v : result.state.u.cells) EXPECT_EQ(v.norm(), 0.0);
  for (double p : result.state.p.values) EXPECT_EQ(p, 0.0);
  for (double r : result.state.rho.values) EXPECT_NEAR(r, 1.0, 1e-14);
  EXPECT_EQ(result.ledger.records.size(), 6u);
  for (const StepRecord& r : result.ledger.records) EXPECT_EQ(r.kinetic, 0.0);
}

TEST(TimeStepper, KineticEnergyDecaysWithoutForcing) {
  const Mesh m = build_triangular(8);
  TimeStepper stepper(m, demo_problem("bump", 0.1), short_run(0.01, 0.2));
  std::size_t observed = 0;
  const auto result = stepper.run([&](std::size_t, const SimulationState&) { ++observed; });
  EXPECT_EQ(observed, 21u);
  const auto& r = result.ledger.records;
  ASSERT_EQ(r.size(), 21u);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_LE(r[i].kinetic, r[i - 1].kinetic * (1.0 + 1e-12));
    EXPECT_GE(r[i].dissipation, r[i - 1].dissipation);
  }
  // Discrete energy inequality: kinetic(t) + 2 * dissipation <= kinetic(0).
  EXPECT_LE(r.back().kinetic + 2.0 * r.back().dissipation, r.front().kinetic * (1.0 + 1e-10));
}

TEST(TimeStepper, DiagnosticsStrideKeepsLastStep) {
  const Mesh m = build_cartesian(3, 3);
  TimeConfig c = short_run(0.1, 0.7);
  c.diagnostics_every = 3;
  TimeStepper stepper(m, demo_problem("bump", 1.0), c);
  const auto result = stepper.run();
  std::vector<std::size_t> steps;
  for (const StepRecord& r : result.ledger.records) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 3, 6, 7}));
}

TEST(TimeStepper, AffineSteadyFlowErrorDecreasesUnderRefinement) {
  // u = (x, -y), rho = 1, p = 0 solves the steady equations with f = (u . grad) u = (x, y).
  ManufacturedCase c;
  c.name = "affine";
  c.rho = [](const Vec2&, double) { return 1.0; };
  c.u = [](const Vec2& x, double) -> Vec2 { return Vec2(x.x(), -x.y()); };
  c.p = [](const Vec2&, double) { return 0.0; };
  c.f = [](const Vec2& x, double) -> Vec2 { return x; };
  c.t_final = 0.1;
  std::vector<double> err;
  for (std::size_t n : {4u, 8u, 16u}) {
    const Mesh m = build_triangular(n);
    const TimeConfig tc = short_run(0.01, c.t_final);
    TimeStepper stepper(m, c.problem_data(), tc);
    ErrorTracker tracker(m, stepper.operators(), c, tc.dt, stepper.rho_lower());
    stepper.run([&](std::size_t step, const SimulationState& s) { tracker.sample(step, s); });
    err.push_back(tracker.velocity_error());
  }
  EXPECT_LT(err[1], err[0]);
  EXPECT_LT(err[2], err[1]);
}

TEST(TimeStepper, RejectsBadSetup) {
  const Mesh m = build_cartesian(2, 2);
  ProblemData d = constant_problem(1.0);
  d.mu = 0.0;
  EXPECT_THROW(TimeStepper(m, d, short_run(0.1, 1.0)), std::invalid_argument);
  ProblemData b = constant_problem(1.0);
  b.boundary_velocity = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
  EXPECT_THROW(TimeStepper(m, b, short_run(0.1, 1.0)), std::invalid_argument);
  EXPECT_THROW(TimeStepper(m, constant_problem(1.0), short_run(0.3, 1.0)), std::invalid_argument);
}

TEST(InvariantViolation, CarriesLocation) {
  const InvariantViolation v(12, 4, -0.5, "density left the admissible range");
  EXPECT_EQ(v.step(), 12u);
  EXPECT_EQ(v.cell(), 4u);
  EXPECT_EQ(v.value(), -0.5);
  EXPECT_NE(std::string(v.what()).find("cell 4"), std::string::npos);
  const InvariantViolation g(3, no_cell, 1.0, "mass balance violated");
  EXPECT_EQ(std::string(g.what()).find("cell"), std::string::npos);
}

TEST(Diagnostics, CsvHeaderAndRow) {
  EXPECT_EQ(diagnostics_csv_header(), "step,t,rho_min,rho_max,mass,l2_rho,kinetic,dissipation,div_norm");
  StepRecord r;
  r.step = 7;
  r.t = 0.5;
  const std::string row = diagnostics_csv_row(r);
  EXPECT_EQ(row.substr(0, 2), "7,");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 8);
}
