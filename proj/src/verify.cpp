#include "vdns/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "vdns/convection.hpp"
#include "vdns/quadrature.hpp"

namespace vdns {

ProblemData ManufacturedCase::problem_data() const {
  ProblemData d;
  d.rho0 = [rho = rho](const Vec2& x) { return rho(x, 0.0); };
  d.u0 = [u = u](const Vec2& x) -> Vec2 { return u(x, 0.0); };
  d.force = f;
  d.boundary_velocity = u;
  d.boundary_density = rho;
  d.mu = mu;
  return d;
}

ManufacturedCase guermond_case(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("guermond_case: mu must be positive");
  ManufacturedCase c;
  c.name = "guermond";
  c.mu = mu;
  c.t_final = 1.0;
  c.rho = [](const Vec2& x, double t) {
    const double s = std::sin(t);
    return 2.0 + x.x() * std::cos(s) + x.y() * std::sin(s);
  };
  c.u = [](const Vec2& x, double t) -> Vec2 { return Vec2(-x.y(), x.x()) * std::cos(t); };
  c.p = [](const Vec2&, double) { return 0.0; };
  c.f = [rho = c.rho](const Vec2& x, double t) -> Vec2 {
    const double ct = std::cos(t);
    const Vec2 accel = std::sin(t) * Vec2(x.y(), -x.x()) + ct * ct * Vec2(-x.x(), -x.y());
    return rho(x, t) * accel;
  };
  return c;
}

ProblemData demo_problem(const std::string& name, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("demo_problem: mu must be positive");
  ProblemData d;
  d.mu = mu;
  const VectorFunction bump = [curl = bubble_streamfunction().curl](const Vec2& x) -> Vec2 {
    return 100.0 * curl(x);
  };
  if (name == "zero") {
    d.rho0 = [](const Vec2&) { return 1.0; };
    d.u0 = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
  } else if (name == "bump") {
    d.rho0 = [](const Vec2&) { return 1.0; };
    d.u0 = bump;
  } else if (name == "stratified") {
    d.rho0 = [](const Vec2& x) { return 2.0 + std::tanh((x.y() - 0.5) / 0.1); };
    d.u0 = bump;
  } else {
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
  return d;
}

PdeResidual pde_residual(const ManufacturedCase& c, const Vec2& x, double t, double h, double h2) {
  const Vec2 ex(1.0, 0.0);
  const Vec2 ey(0.0, 1.0);
  const Vec2 u = c.u(x, t);
  const Vec2 du_dt = (c.u(x, t + h) - c.u(x, t - h)) / (2.0 * h);
  const Vec2 du_dx = (c.u(x + h * ex, t) - c.u(x - h * ex, t)) / (2.0 * h);
  const Vec2 du_dy = (c.u(x + h * ey, t) - c.u(x - h * ey, t)) / (2.0 * h);
  const Vec2 lap = (c.u(x + h2 * ex, t) + c.u(x - h2 * ex, t) + c.u(x + h2 * ey, t) +
                    c.u(x - h2 * ey, t) - 4.0 * u) /
                   (h2 * h2);
  const Vec2 grad_p((c.p(x + h * ex, t) - c.p(x - h * ex, t)) / (2.0 * h),
                    (c.p(x + h * ey, t) - c.p(x - h * ey, t)) / (2.0 * h));
  const double rho = c.rho(x, t);
  const double drho_dt = (c.rho(x, t + h) - c.rho(x, t - h)) / (2.0 * h);
  const Vec2 grad_rho((c.rho(x + h * ex, t) - c.rho(x - h * ex, t)) / (2.0 * h),
                      (c.rho(x + h * ey, t) - c.rho(x - h * ey, t)) / (2.0 * h));

  PdeResidual r;
  r.momentum = rho * (du_dt + u.x() * du_dx + u.y() * du_dy) - c.mu * lap + grad_p - c.f(x, t);
  r.divergence = du_dx.x() + du_dy.y();
  r.transport = drho_dt + u.dot(grad_rho);
  return r;
}

PdeResidualSummary sample_pde_residual(const ManufacturedCase& c, std::size_t samples,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(c.domain.x_min, c.domain.x_max);
  std::uniform_real_distribution<double> uy(c.domain.y_min, c.domain.y_max);
  std::uniform_real_distribution<double> ut(0.0, c.t_final);
  PdeResidualSummary s;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec2 x(ux(rng), uy(rng));
    const double t = ut(rng);
    const PdeResidual r = pde_residual(c, x, t);
    s.momentum = std::max(s.momentum, r.momentum.norm());
    s.divergence = std::max(s.divergence, std::abs(r.divergence));
    s.transport = std::max(s.transport, std::abs(r.transport));
  }
  return s;
}

double density_error(const Mesh& mesh, std::span<const CellField> errors,
                     std::span<const HybridVelocity> velocities, double dt) {
  if (errors.size() != velocities.size()) {
    throw std::invalid_argument("density_error: series lengths differ");
  }
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t n = 0; n < errors.size(); ++n) {
    if (n > 0) {
      const double s = upwind_seminorm(mesh, velocities[n], errors[n]);
      sum += dt * s * s;
    }
    worst = std::max(worst, l2_norm_squared(mesh, errors[n]) + sum);
  }
  return std::sqrt(worst);
}

double velocity_error(const Mesh& mesh, const LocalOperators& ops,
                      std::span<const HybridVelocity> errors, double dt, double mu,
                      double rho_lower) {
  double worst = 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < errors.size(); ++n) {
    const double e0 = norm_0h(mesh, errors[n]);
    worst = std::max(worst, e0 * e0);
    if (n > 0) sum += dt * a_h(mesh, ops, errors[n], errors[n]);
  }
  return std::sqrt(rho_lower * worst + mu * sum);
}

ErrorTracker::ErrorTracker(const Mesh& mesh, const LocalOperators& ops, const ManufacturedCase& c,
                           double dt, double rho_lower)
    : mesh_(mesh), ops_(ops), case_(c), dt_(dt), rho_lower_(rho_lower) {}

void ErrorTracker::sample(std::size_t step, const SimulationState& state) {
  const double t = state.t;
  CellField e = state.rho;
  const CellField exact = project_cell(mesh_, [&](const Vec2& x) { return case_.rho(x, t); });
  for (std::size_t c = 0; c < e.size(); ++c) e[c] -= exact[c];
  const HybridVelocity ue =
      state.u - interpolate_velocity(mesh_, [&](const Vec2& x) { return case_.u(x, t); }, false);

  if (step > 0) {
    const double s = upwind_seminorm(mesh_, state.u, e);
    density_sum_ += dt_ * s * s;
    velocity_sum_ += dt_ * a_h(mesh_, ops_, ue, ue);
  }
  density_max_ = std::max(density_max_, l2_norm_squared(mesh_, e) + density_sum_);
  const double e0 = norm_0h(mesh_, ue);
  velocity_max_ = std::max(velocity_max_, e0 * e0);
}

double ErrorTracker::density_error() const { return std::sqrt(density_max_); }

double ErrorTracker::velocity_error() const {
  return std::sqrt(rho_lower_ * velocity_max_ + case_.mu * velocity_sum_);
}

std::vector<std::optional<double>> eoc(std::span<const double> errors, std::span<const double> hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw std::invalid_argument("eoc: need matching sequences of length >= 2");
  }
  for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
    if (!(hs[i] > hs[i + 1]) || !(hs[i + 1] > 0.0)) {
      throw std::invalid_argument("eoc: mesh sizes must be positive and strictly decreasing");
    }
  }
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] > 0.0 && errors[i + 1] > 0.0) {
      rates.emplace_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
    } else {
      rates.emplace_back(std::nullopt);
    }
  }
  return rates;
}

double dh_consistency_residual(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const ScalarFunction& phi) {
  const CellField phi_h = project_cell(mesh, phi);
  double res = d_h(mesh, u, rho, phi_h);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    // int_T grad phi = sum_F int_F phi n_TF
    Vec2 g = Vec2::Zero();
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      g += integrate_face(mesh, mesh.cell_faces(c)[j], phi) * mesh.outward_normal(c, j);
    }
    res += rho[c] * u.cells[c].dot(g);
  }
  return res;
}

double ch_consistency_residual(const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
                               const VectorFunction& v) {
  const HybridVelocity vh = interpolate_velocity(mesh, v, true);
  const UpwindTrace trace = upwind_trace(mesh, rho, u);
  double res = c_h(mesh, trace, u, vh) + 0.5 * d_h(mesh, u, rho, dot_cells(u, vh));
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    res += mesh.cell_measure(c) * rho[c] * u.cells[c].dot(grad_T(mesh, c, vh) * u.cells[c]);
  }
  return res;
}

StreamFunction bubble_streamfunction() {
  auto b = [](double s) { return s * s * (1.0 - s) * (1.0 - s); };
  auto db = [](double s) { return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s); };
  StreamFunction out;
  out.psi = [b](const Vec2& x) { return b(x.x()) * b(x.y()); };
  out.curl = [b, db](const Vec2& x) -> Vec2 {
    return Vec2(b(x.x()) * db(x.y()), -db(x.x()) * b(x.y()));
  };
  return out;
}

namespace {

/// Unit tangent t_F with n_F = t_F rotated by -90 degrees, and the face
/// endpoints (a, b) ordered along it.
void face_tangent(const Mesh& mesh, std::size_t f, Vec2& t, std::size_t& a, std::size_t& b) {
  const Vec2& n = mesh.face_normal(f);
  t = Vec2(-n.y(), n.x());
  const Face& face = mesh.face(f);
  if ((mesh.vertex(face.v1) - mesh.vertex(face.v0)).dot(t) > 0.0) {
    a = face.v0;
    b = face.v1;
  } else {
    a = face.v1;
    b = face.v0;
  }
}

ConsistencyStudy finish_study(ConsistencyStudy s) {
  if (s.h.size() >= 2) {
    std::vector<double> abs_res(s.residual.size());
    std::transform(s.residual.begin(), s.residual.end(), abs_res.begin(),
                   [](double r) { return std::abs(r); });
    s.rates = eoc(abs_res, s.h);
  }
  return s;
}

}  // namespace

HybridVelocity interpolate_curl(const Mesh& mesh, const StreamFunction& s, bool homogeneous) {
  HybridVelocity v = interpolate_velocity(mesh, s.curl, homogeneous);
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    if (homogeneous && mesh.is_boundary(f)) continue;
    Vec2 t;
    std::size_t a = 0;
    std::size_t b = 0;
    face_tangent(mesh, f, t, a, b);
    const double normal = (s.psi(mesh.vertex(b)) - s.psi(mesh.vertex(a))) / mesh.face_measure(f);
    const double tangential = v.faces[f].dot(t);
    v.faces[f] = normal * mesh.face_normal(f) + tangential * t;
  }
  return v;
}

ConsistencyStudy consistency_rate_dh(std::span<const Mesh> levels, const ScalarFunction& rho,
                                     const StreamFunction& stream, const ScalarFunction& phi) {
  ConsistencyStudy s;
  for (const Mesh& mesh : levels) {
    s.h.push_back(mesh.h());
    s.residual.push_back(dh_consistency_residual(mesh, project_cell(mesh, rho),
                                                 interpolate_curl(mesh, stream), phi));
  }
  return finish_study(std::move(s));
}

ConsistencyStudy consistency_rate_ch(std::span<const Mesh> levels, const ScalarFunction& rho,
                                     const StreamFunction& stream, const VectorFunction& v) {
  ConsistencyStudy s;
  for (const Mesh& mesh : levels) {
    s.h.push_back(mesh.h());
    s.residual.push_back(ch_consistency_residual(mesh, project_cell(mesh, rho),
                                                 interpolate_curl(mesh, stream), v));
  }
  return finish_study(std::move(s));
}

HybridVelocity random_divergence_free(const Mesh& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> psi(mesh.n_vertices());
  for (double& p : psi) p = unit(rng);
  for (std::size_t f : mesh.boundary_faces()) {
    psi[mesh.face(f).v0] = 0.0;
    psi[mesh.face(f).v1] = 0.0;
  }
  HybridVelocity v = HybridVelocity::zero(mesh, true);
  for (Vec2& c : v.cells) c = Vec2(unit(rng), unit(rng));
  for (std::size_t f : mesh.interior_faces()) {
    Vec2 t;
    std::size_t a = 0;
    std::size_t b = 0;
    face_tangent(mesh, f, t, a, b);
    const double normal = (psi[b] - psi[a]) / mesh.face_measure(f);
    v.faces[f] = normal * mesh.face_normal(f) + unit(rng) * t;
  }
  return v;
}

HybridVelocity random_hybrid(const Mesh& mesh, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  HybridVelocity v = HybridVelocity::zero(mesh, true);
  for (Vec2& c : v.cells) c = Vec2(unit(rng), unit(rng));
  for (std::size_t f : mesh.interior_faces()) v.faces[f] = Vec2(unit(rng), unit(rng));
  return v;
}

CellField random_cell_field(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  CellField q;
  q.values.resize(mesh.n_cells());
  for (double& v : q.values) v = dist(rng);
  return q;
}

namespace {

/// Scalar DOF index on U_h,0: cells, then interior faces; -1 on boundary faces.
struct ScalarDofs {
  std::vector<Eigen::Index> face;
  Eigen::Index size = 0;

  explicit ScalarDofs(const Mesh& mesh) : face(mesh.n_faces(), -1) {
    size = static_cast<Eigen::Index>(mesh.n_cells());
    for (std::size_t f : mesh.interior_faces()) face[f] = size++;
  }
  Eigen::Index node(const Mesh& mesh, std::size_t c, std::size_t k) const {
    return k == 0 ? static_cast<Eigen::Index>(c) : face[mesh.cell_faces(c)[k - 1]];
  }
};

/// Dense scalar matrix of ||.||_1,h^2 on U_h,0.
Eigen::MatrixXd norm_1h_matrix(const Mesh& mesh, const ScalarDofs& dofs) {
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(dofs.size, dofs.size);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto ct = static_cast<Eigen::Index>(c);
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const double w = mesh.face_measure(f) / mesh.cell_diameter(c);
      n(ct, ct) += w;
      const Eigen::Index fi = dofs.face[f];
      if (fi < 0) continue;
      n(fi, fi) += w;
      n(ct, fi) -= w;
      n(fi, ct) -= w;
    }
  }
  return n;
}

}  // namespace

RatioRange ah_to_1h_range(const Mesh& mesh, const LocalOperators& ops) {
  const ScalarDofs dofs(mesh);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dofs.size, dofs.size);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::MatrixXd& local = ops.cell(c).a;
    for (std::size_t r = 0; r <= mesh.n_cell_faces(c); ++r) {
      const Eigen::Index gr = dofs.node(mesh, c, r);
      if (gr < 0) continue;
      for (std::size_t s = 0; s <= mesh.n_cell_faces(c); ++s) {
        const Eigen::Index gs = dofs.node(mesh, c, s);
        if (gs < 0) continue;
        a(gr, gs) += local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
      }
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, norm_1h_matrix(mesh, dofs),
                                                                Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw std::runtime_error("ah_to_1h_range: eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  return {std::sqrt(lambda.minCoeff()), std::sqrt(lambda.maxCoeff())};
}

double sobolev2_ratio_max(const Mesh& mesh) {
  const ScalarDofs dofs(mesh);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dofs.size, dofs.size);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto ct = static_cast<Eigen::Index>(c);
    const double hT = mesh.cell_diameter(c);
    s(ct, ct) += mesh.cell_measure(c) + hT * mesh.cell_perimeter(c);
    for (std::size_t f : mesh.cell_faces(c)) {
      if (dofs.face[f] >= 0) s(dofs.face[f], dofs.face[f]) += hT * mesh.face_measure(f);
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, norm_1h_matrix(mesh, dofs),
                                                                Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("sobolev2_ratio_max: eigensolver failed");
  }
  return std::sqrt(eig.eigenvalues().maxCoeff());
}

double sobolev_ratio_sampled(const Mesh& mesh, double p, std::size_t samples, std::uint64_t seed) {
  Vec2 lo = mesh.vertex(0);
  Vec2 hi = mesh.vertex(0);
  for (const Vec2& x : mesh.vertices()) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr int modes = 3;
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    std::array<double, 2 * modes * modes> coef{};
    for (double& c : coef) c = unit(rng);
    const VectorFunction field = [&](const Vec2& x) -> Vec2 {
      const double sx = (x.x() - lo.x()) / (hi.x() - lo.x());
      const double sy = (x.y() - lo.y()) / (hi.y() - lo.y());
      Vec2 v = Vec2::Zero();
      for (int k = 0; k < modes; ++k) {
        for (int l = 0; l < modes; ++l) {
          const double m = std::sin((k + 1) * std::numbers::pi * sx) *
                           std::sin((l + 1) * std::numbers::pi * sy);
          v.x() += coef[k * modes + l] * m;
          v.y() += coef[modes * modes + k * modes + l] * m;
        }
      }
      return v;
    };
    const HybridVelocity v = interpolate_velocity(mesh, field, true);
    const double denom = norm_1h(mesh, v);
    if (denom > 0.0) worst = std::max(worst, sobolev_lhs(mesh, v, p) / denom);
  }
  return worst;
}

}  // namespace vdns
