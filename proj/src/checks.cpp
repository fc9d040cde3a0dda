#include "vdns/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "vdns/assembly.hpp"
#include "vdns/convection.hpp"
#include "vdns/io.hpp"
#include "vdns/operators.hpp"
#include "vdns/timestepper.hpp"
#include "vdns/verify.hpp"

namespace vdns {

namespace {

struct NamedMesh {
  std::string name;
  Mesh mesh;
};

std::vector<NamedMesh> identity_meshes() {
  std::vector<NamedMesh> m;
  m.push_back({"cartesian 2x2", build_cartesian(2, 2)});
  m.push_back({"two triangles", build_triangular(1)});
  m.push_back({"hexa_0", bundled_mesh("hexa_0")});
  return m;
}

CheckResult at_most(int criterion, std::string name, double value, double limit,
                    std::string detail = {}) {
  CheckResult r;
  r.criterion = criterion;
  r.name = std::move(name);
  r.value = value;
  r.limit = limit;
  r.relation = "<=";
  r.passed = std::isfinite(value) && value <= limit;
  r.detail = std::move(detail);
  return r;
}

CheckResult at_least(int criterion, std::string name, double value, double limit,
                     std::string detail = {}) {
  CheckResult r = at_most(criterion, std::move(name), value, limit, std::move(detail));
  r.relation = ">=";
  r.passed = std::isfinite(value) && value >= limit;
  return r;
}

std::string join_meshes(const std::vector<NamedMesh>& meshes) {
  std::string s;
  for (const NamedMesh& m : meshes) s += (s.empty() ? "" : ", ") + m.name;
  return s;
}

/// sum_T sum_F |eta_F q_TF chi_T|: the size of the individual terms of d_h.
double dh_scale(const Mesh& mesh, const HybridVelocity& w, const CellField& eta,
                const CellField& chi) {
  const UpwindTrace trace = upwind_trace(mesh, eta, w);
  double s = 0.0;
  for (std::size_t f : mesh.interior_faces()) {
    const Face& face = mesh.face(f);
    s += std::abs(trace.density[f] * trace.flux[f]) *
         (std::abs(chi[face.owner]) + std::abs(chi[face.neighbor]));
  }
  return s;
}

void identity_suite(const NamedMesh& m, const CheckOptions& o, std::mt19937_64& rng,
                    double& ch_worst, double& dh_worst, double& jump_worst, double& ibp_worst) {
  const Mesh& mesh = m.mesh;
  for (std::size_t i = 0; i < o.identity_samples; ++i) {
    const CellField rho = random_cell_field(mesh, rng, 1.0, 3.0);
    const HybridVelocity w = random_hybrid(mesh, rng);
    const HybridVelocity v = random_hybrid(mesh, rng);
    const UpwindTrace trace = upwind_trace(mesh, rho, w);
    const double scale = c_h_scale(mesh, trace, v, v);
    if (scale > 0.0) ch_worst = std::max(ch_worst, std::abs(c_h(mesh, trace, v, v)) / scale);

    const HybridVelocity z = random_divergence_free(mesh, rng);
    const CellField eta = random_cell_field(mesh, rng, -1.0, 1.0);
    const CellField chi = random_cell_field(mesh, rng, -1.0, 1.0);
    const double seminorm = upwind_seminorm(mesh, z, eta);
    const double self_scale = dh_scale(mesh, z, eta, eta);
    if (self_scale > 0.0) {
      dh_worst = std::max(dh_worst,
                          std::abs(d_h(mesh, z, eta, eta) - seminorm * seminorm) / self_scale);
    }
    const double cross_scale = dh_scale(mesh, z, eta, chi);
    if (cross_scale > 0.0) {
      jump_worst = std::max(jump_worst, std::abs(d_h(mesh, z, eta, chi) -
                                                 d_h_jump_form(mesh, z, eta, chi)) /
                                            cross_scale);
    }
  }
  for (std::size_t i = 0; i < o.ibp_samples; ++i) {
    const CellField rho = random_cell_field(mesh, rng, 1.0, 3.0);
    const HybridVelocity u = random_divergence_free(mesh, rng);
    const HybridVelocity v = random_hybrid(mesh, rng);
    ibp_worst = std::max(ibp_worst, discrete_ibp_check(mesh, rho, u, v).residual);
  }
}

/// sum over components of |x|^T |S| |x|: the size of the terms of a quadratic form.
double abs_quadratic_form(const Eigen::MatrixXd& s, const LocalVelocity& v) {
  double total = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.faces.size() + 1));
    x(0) = std::abs(v.cell(comp));
    for (std::size_t j = 0; j < v.faces.size(); ++j) {
      x(static_cast<Eigen::Index>(j + 1)) = std::abs(v.faces[j](comp));
    }
    total += x.dot(s.cwiseAbs() * x);
  }
  return total;
}

/// Worst defects of G_T, s_T and D_h on affine and quadratic fields.
void exactness_suite(const Mesh& mesh, std::mt19937_64& rng, double& grad_worst,
                     double& stab_worst, double& div_worst) {
  const LocalOperators ops(mesh);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int sample = 0; sample < 20; ++sample) {
    const Vec2 a(unit(rng), unit(rng));
    Mat2 b;
    b << unit(rng), unit(rng), unit(rng), unit(rng);
    const VectorFunction affine = [a, b](const Vec2& x) -> Vec2 { return a + b * x; };
    const HybridVelocity iv = interpolate_velocity(mesh, affine, false);
    const double bnorm = b.cwiseAbs().maxCoeff();
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      const LocalVelocity loc = restrict_to_cell(mesh, iv, c);
      grad_worst = std::max(grad_worst, (grad_T(mesh, c, loc) - b).cwiseAbs().maxCoeff() / bnorm);
      stab_worst = std::max(stab_worst, std::abs(stab_sT(mesh, ops, c, loc, loc)) /
                                            abs_quadratic_form(ops.cell(c).stab, loc));
    }

    // Quadratic field: D_T I_h v = |T|^-1 int_dT v.n, which equals the mean of div v.
    const double k[6] = {unit(rng), unit(rng), unit(rng), unit(rng), unit(rng), unit(rng)};
    const VectorFunction quad = [a, b, k](const Vec2& x) -> Vec2 {
      return a + b * x +
             Vec2(k[0] * x.x() * x.x() + k[1] * x.x() * x.y() + k[2] * x.y() * x.y(),
                  k[3] * x.x() * x.x() + k[4] * x.x() * x.y() + k[5] * x.y() * x.y());
    };
    const ScalarFunction div = [b, k](const Vec2& x) {
      return b(0, 0) + b(1, 1) + 2.0 * k[0] * x.x() + k[1] * x.y() + k[4] * x.x() +
             2.0 * k[5] * x.y();
    };
    const CellField dh = divergence(mesh, interpolate_velocity(mesh, quad, false));
    const CellField pi = project_cell(mesh, div);
    const double scale = bnorm + std::abs(k[0]) + std::abs(k[1]) + std::abs(k[2]) +
                         std::abs(k[3]) + std::abs(k[4]) + std::abs(k[5]);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      div_worst = std::max(div_worst, std::abs(dh[c] - pi[c]) / scale);
    }
  }
}

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

/// Largest relative change between consecutive entries.
double drift(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(v[i] - v[i - 1]) / std::abs(v[i - 1]));
  }
  return worst;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4g", x);
  return s;
}

void transport_suite(const Mesh& mesh, const CheckOptions& o, std::mt19937_64& rng,
                     double& mmatrix_margin, double& range_worst, double& mass_worst,
                     double& decay_worst) {
  std::uniform_real_distribution<double> exponent(0.0, 1.0);
  for (std::size_t i = 0; i < o.transport_samples; ++i) {
    HybridVelocity u = random_divergence_free(mesh, rng);
    u *= std::pow(10.0, 2.0 * exponent(rng) - 1.0);
    const double dt = std::pow(10.0, -4.0 * exponent(rng));
    const CellField rho = random_cell_field(mesh, rng, 1.0, 3.0);
    const SparseSystem sys = assemble_density_transport(mesh, u, rho, dt);

    // Z-matrix with positive diagonal and strict row dominance; margin relative to |T|/dt.
    std::vector<double> diag(mesh.n_cells(), 0.0);
    std::vector<double> off(mesh.n_cells(), 0.0);
    bool sign_ok = true;
    for (Eigen::Index k = 0; k < sys.matrix.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, k); it; ++it) {
        if (it.row() == it.col()) {
          diag[static_cast<std::size_t>(it.row())] += it.value();
        } else {
          if (it.value() > 0.0) sign_ok = false;
          off[static_cast<std::size_t>(it.row())] += std::abs(it.value());
        }
      }
    }
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      const double margin = sign_ok ? (diag[c] - off[c]) / (mesh.cell_measure(c) / dt) : -1.0;
      mmatrix_margin = std::min(mmatrix_margin, margin);
    }

    const Eigen::VectorXd x = solve(sys);
    CellField next;
    next.values.assign(x.data(), x.data() + x.size());
    const double lo = rho.min();
    const double hi = rho.max();
    for (double r : next.values) {
      range_worst = std::max(range_worst, std::max(lo - r, r - hi) / hi);
    }
    const double m0 = integral(mesh, rho);
    mass_worst = std::max(mass_worst, std::abs(integral(mesh, next) - m0) / m0);
    const double s = upwind_seminorm(mesh, u, next);
    const double lhs = l2_norm_squared(mesh, next) + 2.0 * dt * s * s;
    decay_worst = std::max(decay_worst, lhs / l2_norm_squared(mesh, rho) - 1.0);
  }
}

/// Largest relative increase of the kinetic proxy between consecutive records.
double kinetic_increase(const EnergyLedger& ledger) {
  double worst = -1.0;
  for (std::size_t i = 1; i < ledger.records.size(); ++i) {
    const double prev = ledger.records[i - 1].kinetic;
    worst = std::max(worst, (ledger.records[i].kinetic - prev) / prev);
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> identity_checks(const CheckOptions& o) {
  const std::vector<NamedMesh> meshes = identity_meshes();
  std::mt19937_64 rng(o.seed);
  double ch = 0.0, dh = 0.0, jump = 0.0, ibp = 0.0;
  double grad = 0.0, stab = 0.0, div = 0.0;
  for (const NamedMesh& m : meshes) {
    identity_suite(m, o, rng, ch, dh, jump, ibp);
    exactness_suite(m.mesh, rng, grad, stab, div);
  }
  const std::string where = join_meshes(meshes);
  const std::string per_mesh = std::to_string(o.identity_samples) + " samples per mesh on " + where;
  return {
      at_most(1, "c_h(rho, w, v, v) = 0", ch, 1e-12, per_mesh),
      at_most(1, "d_h(w, eta, eta) = |eta|_upw^2 on Z_h", dh, 1e-12, per_mesh),
      at_most(1, "d_h = jump form on Z_h", jump, 1e-12, per_mesh),
      at_most(1, "discrete integration by parts", ibp, 1e-12,
              std::to_string(o.ibp_samples) + " samples per mesh on " + where),
      at_most(1, "G_T exact on affine fields", grad, 1e-12, where),
      at_most(1, "s_T vanishes on affine fields", stab, 1e-12, "relative to |x|^T |S_T| |x|"),
      at_most(1, "D_h I_h v = pi_h div v", div, 1e-12, "quadratic fields on " + where),
  };
}

std::vector<CheckResult> stability_checks(const CheckOptions& o) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(o.seed + 1);

  std::vector<NamedMesh> meshes;
  meshes.push_back({"triangular n=8", build_triangular(8)});
  meshes.push_back({"cartesian n=10", build_cartesian(10, 10)});
  meshes.push_back({"hexa_1", bundled_mesh("hexa_1")});
  double margin = 1.0, range = 0.0, mass = 0.0, decay = -1.0;
  for (const NamedMesh& m : meshes) transport_suite(m.mesh, o, rng, margin, range, mass, decay);
  const std::string where = std::to_string(o.transport_samples) + " (u, dt) samples per mesh on " +
                            join_meshes(meshes);
  out.push_back(at_least(2, "transport matrix is an M-matrix", margin, 1.0 - 1e-10,
                         "min (diag - sum|offdiag|) / (|T|/dt); " + where));
  out.push_back(at_most(2, "transport step preserves range", range, 1e-10,
                        "violation / rho_max; " + where));
  out.push_back(at_most(2, "transport step conserves mass", mass, 1e-10, where));
  out.push_back(at_most(2, "density L2 decay per step", decay, 1e-10,
                        "(||rho1||^2 + 2 dt |rho1|_upw^2) / ||rho0||^2 - 1; " + where));

  {
    // Full manufactured run with inflow: mass balance including the boundary flux.
    const Mesh mesh = build_triangular(4);
    TimeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    TimeStepper stepper(mesh, guermond_case(1.0).problem_data(), cfg);
    const auto result = stepper.run();
    const StepRecord& first = result.ledger.records.front();
    double worst = 0.0;
    for (const StepRecord& r : result.ledger.records) {
      worst = std::max(worst, std::abs(r.mass + r.boundary_outflow - first.mass) / first.mass);
    }
    out.push_back(at_most(2, "mass balance over a full guermond run", worst, 1e-10,
                          "triangular n=4, 1000 steps, outflow through the boundary included"));
  }

  for (const NamedMesh& m : {NamedMesh{"triangular n=8", build_triangular(8)},
                             NamedMesh{"hexa_0", bundled_mesh("hexa_0")}}) {
    TimeConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_final = 1.5;
    TimeStepper stepper(m.mesh, demo_problem("stratified", 1e-2), cfg);
    const auto result = stepper.run();
    const auto& rec = result.ledger.records;
    out.push_back(at_most(2, "kinetic proxy nonincreasing (" + m.name + ")",
                          kinetic_increase(result.ledger), 1e-12,
                          "max relative increase per step, f = 0, stratified density, " +
                              std::to_string(rec.size() - 1) + " steps"));
    double worst = 0.0;
    for (const StepRecord& r : rec) {
      worst = std::max(worst, std::abs(r.mass - rec.front().mass) / rec.front().mass);
    }
    out.push_back(at_most(2, "mass conserved with homogeneous data (" + m.name + ")", worst, 1e-10));
  }

  for (int family = 0; family < 2; ++family) {
    std::vector<double> amin, amax, sob2, sob4;
    for (int level = 0; level < 3; ++level) {
      const Mesh mesh = family == 0 ? build_triangular(4u << level)
                                    : build_cartesian(5u << level, 5u << level);
      const LocalOperators ops(mesh);
      const RatioRange r = ah_to_1h_range(mesh, ops);
      amin.push_back(r.min);
      amax.push_back(r.max);
      sob2.push_back(sobolev2_ratio_max(mesh));
      sob4.push_back(sobolev_ratio_sampled(mesh, 4.0, 20, o.seed));
    }
    const std::string fam = family == 0 ? "triangular" : "cartesian";
    const std::string levels = ", levels 0-2";
    out.push_back(at_most(2, "min ||v||_a,h / ||v||_1,h drift (" + fam + ")", drift(amin), 0.10,
                          list(amin) + levels));
    out.push_back(at_most(2, "max ||v||_a,h / ||v||_1,h drift (" + fam + ")", drift(amax), 0.10,
                          list(amax) + levels));
    out.push_back(at_most(2, "Sobolev p=2 ratio drift (" + fam + ")", drift(sob2), 0.10,
                          list(sob2) + levels));
    out.push_back(at_most(2, "Sobolev p=4 sampled ratio drift (" + fam + ")", drift(sob4), 0.10,
                          list(sob4) + levels));
  }
  return out;
}

std::vector<CheckResult> consistency_checks(const CheckOptions&) {
  using std::numbers::pi;
  const ScalarFunction rho = [](const Vec2& x) {
    return 2.0 + std::sin(pi * x.x()) * std::cos(pi * x.y()) + 0.5 * x.x() * x.y() * x.y();
  };
  const StreamFunction stream = bubble_streamfunction();
  const ScalarFunction phi = [](const Vec2& x) {
    const double b = x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y());
    return b * b * (1.0 + x.x() + 2.0 * x.y() + x.x() * x.y());
  };
  const VectorFunction v = [](const Vec2& x) -> Vec2 {
    return Vec2(std::sin(pi * x.x()) * std::sin(pi * x.y()),
                x.x() * (1.0 - x.x()) * x.y() * (1.0 - x.y()));
  };

  std::vector<CheckResult> out;
  for (int family = 0; family < 2; ++family) {
    std::vector<Mesh> levels;
    for (unsigned level = 0; level < 3; ++level) {
      levels.push_back(family == 0 ? build_triangular(8u << level)
                                   : build_cartesian(10u << level, 10u << level));
    }
    const std::string fam = family == 0 ? "triangular n=8,16,32" : "cartesian n=10,20,40";
    for (int form = 0; form < 2; ++form) {
      const ConsistencyStudy s = form == 0 ? consistency_rate_dh(levels, rho, stream, phi)
                                           : consistency_rate_ch(levels, rho, stream, v);
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& r : s.rates) worst = std::min(worst, r.value_or(-1.0));
      std::string detail = "residuals";
      for (double r : s.residual) detail += fmt(" %.3e", r);
      detail += "; " + fam;
      out.push_back(at_least(4, std::string(form == 0 ? "d_h" : "c_h") +
                                    " consistency EOC (" + (family == 0 ? "triangular" : "cartesian") +
                                    ")",
                             worst, 0.4, detail));
    }
  }
  return out;
}

std::vector<CheckResult> run_property_suite(const CheckOptions& o) {
  std::vector<CheckResult> all = identity_checks(o);
  for (auto& r : stability_checks(o)) all.push_back(std::move(r));
  for (auto& r : consistency_checks(o)) all.push_back(std::move(r));
  return all;
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-4s %-2s %-52s %12s %-2s %-9s  %s\n", "stat", "#", "check",
                "value", "", "limit", "detail");
  out << line;
  for (const CheckResult& r : results) {
    std::snprintf(line, sizeof line, "%-4s %-2d %-52s %12.4e %-2s %-9.3g  %s\n",
                  r.passed ? "PASS" : "FAIL", r.criterion, r.name.c_str(), r.value,
                  r.relation.c_str(), r.limit, r.detail.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace vdns
