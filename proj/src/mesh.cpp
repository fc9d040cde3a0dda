#include "vdns/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace vdns {

namespace {

struct EdgeUse {
  std::size_t cell;
  std::size_t local;
  bool forward;  // traversed as (min, max)
};

}  // namespace

Mesh Mesh::from_polygons(std::vector<Vec2> vertices, std::vector<std::vector<std::size_t>> cells) {
  Mesh m;
  m.vertices_ = std::move(vertices);
  m.cells_ = std::move(cells);
  const std::size_t nv = m.vertices_.size();
  const std::size_t nc = m.cells_.size();
  if (nc == 0) {
    throw MeshTopologyError("mesh has no cells");
  }

  m.cell_measures_.resize(nc);
  m.centroids_.resize(nc);
  m.diameters_.resize(nc);

  for (std::size_t c = 0; c < nc; ++c) {
    const auto& loop = m.cells_[c];
    if (loop.size() < 3) {
      throw MeshTopologyError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    }
    for (std::size_t i = 0; i < loop.size(); ++i) {
      if (loop[i] >= nv) {
        throw MeshTopologyError("cell " + std::to_string(c) + " references vertex " +
                                std::to_string(loop[i]) + " out of range");
      }
      if (loop[i] == loop[(i + 1) % loop.size()]) {
        throw MeshTopologyError("cell " + std::to_string(c) + " repeats vertex " +
                                std::to_string(loop[i]));
      }
    }
    // Shoelace area and centroid, relative to the first vertex to limit cancellation.
    const Vec2 origin = m.vertices_[loop[0]];
    double twice_area = 0.0;
    Vec2 moment = Vec2::Zero();
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec2 a = m.vertices_[loop[i]] - origin;
      const Vec2 b = m.vertices_[loop[(i + 1) % loop.size()]] - origin;
      const double cross = a.x() * b.y() - a.y() * b.x();
      twice_area += cross;
      moment += cross * (a + b);
    }
    if (!(twice_area > 0.0)) {
      throw MeshOrientationError("cell " + std::to_string(c) +
                                 " is clockwise or degenerate (signed area " +
                                 std::to_string(0.5 * twice_area) + ")");
    }
    m.cell_measures_[c] = 0.5 * twice_area;
    m.centroids_[c] = origin + moment / (3.0 * twice_area);

    double diam = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      for (std::size_t j = i + 1; j < loop.size(); ++j) {
        diam = std::max(diam, (m.vertices_[loop[i]] - m.vertices_[loop[j]]).norm());
      }
    }
    m.diameters_[c] = diam;
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<EdgeUse>> edges;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& loop = m.cells_[c];
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const std::size_t a = loop[i];
      const std::size_t b = loop[(i + 1) % loop.size()];
      edges[{std::min(a, b), std::max(a, b)}].push_back({c, i, a < b});
    }
  }

  m.cell_faces_.resize(nc);
  m.face_signs_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    m.cell_faces_[c].assign(m.cells_[c].size(), 0);
    m.face_signs_[c].assign(m.cells_[c].size(), 0.0);
  }

  m.faces_.reserve(edges.size());
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2) {
      throw MeshTopologyError("face (" + std::to_string(key.first) + ", " +
                              std::to_string(key.second) + ") is shared by " +
                              std::to_string(uses.size()) + " cells");
    }
    if (uses.size() == 2 && uses[0].forward == uses[1].forward) {
      throw MeshTopologyError("face (" + std::to_string(key.first) + ", " +
                              std::to_string(key.second) +
                              ") is traversed in the same direction by cells " +
                              std::to_string(uses[0].cell) + " and " +
                              std::to_string(uses[1].cell));
    }
    const std::size_t f = m.faces_.size();
    // std::map iteration is sorted by (min, max): lexicographic face numbering.
    const EdgeUse& own = uses.size() == 2 && uses[1].cell < uses[0].cell ? uses[1] : uses[0];
    Face face{key.first, key.second, own.cell, no_cell};
    if (uses.size() == 2) {
      face.neighbor = (&own == &uses[0]) ? uses[1].cell : uses[0].cell;
    }
    m.faces_.push_back(face);

    const Vec2& pa = m.vertices_[key.first];
    const Vec2& pb = m.vertices_[key.second];
    const Vec2 d = pb - pa;
    const double len = d.norm();
    if (!(len > 0.0)) {
      throw MeshTopologyError("face (" + std::to_string(key.first) + ", " +
                              std::to_string(key.second) + ") has zero length");
    }
    // Owner traverses its loop counter-clockwise; its outward normal is the
    // traversal direction rotated by -90 degrees.
    const Vec2 dir = own.forward ? d : Vec2(-d);
    m.normals_.push_back(Vec2(dir.y(), -dir.x()) / len);
    m.face_measures_.push_back(len);
    m.midpoints_.push_back(0.5 * (pa + pb));

    for (const EdgeUse& u : uses) {
      m.cell_faces_[u.cell][u.local] = f;
      m.face_signs_[u.cell][u.local] = (u.cell == face.owner) ? 1.0 : -1.0;
    }
    if (face.is_boundary()) {
      m.boundary_faces_.push_back(f);
    } else {
      m.interior_faces_.push_back(f);
    }
  }

  m.h_ = *std::max_element(m.diameters_.begin(), m.diameters_.end());
  return m;
}

double Mesh::cell_perimeter(std::size_t cell) const {
  double p = 0.0;
  for (std::size_t f : cell_faces_[cell]) {
    p += face_measures_[f];
  }
  return p;
}

double Mesh::total_measure() const {
  double s = 0.0;
  for (double a : cell_measures_) {
    s += a;
  }
  return s;
}

Mesh build_cartesian(std::size_t nx, std::size_t ny, const Rectangle& domain) {
  if (nx == 0 || ny == 0) {
    throw MeshError("build_cartesian: nx and ny must be positive");
  }
  std::vector<Vec2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  const double dx = (domain.x_max - domain.x_min) / static_cast<double>(nx);
  const double dy = (domain.y_max - domain.y_min) / static_cast<double>(ny);
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? domain.x_max : domain.x_min + static_cast<double>(i) * dx;
      const double y = (j == ny) ? domain.y_max : domain.y_min + static_cast<double>(j) * dy;
      vertices.emplace_back(x, y);
    }
  }
  auto vid = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return Mesh::from_polygons(std::move(vertices), std::move(cells));
}

Mesh build_triangular(std::size_t n) {
  if (n == 0) {
    throw MeshError("build_triangular: n must be positive");
  }
  std::vector<Vec2> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / static_cast<double>(n),
                            static_cast<double>(j) / static_cast<double>(n));
    }
  }
  auto vid = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      cells.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return Mesh::from_polygons(std::move(vertices), std::move(cells));
}

namespace {

// Next non-empty line with comments stripped; returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    if (raw.find_first_not_of(" \t\r") != std::string::npos) {
      line = raw;
      return true;
    }
  }
  return false;
}

std::size_t parse_header(std::istream& in, std::size_t& line_no, const std::string& keyword) {
  std::string line;
  if (!next_line(in, line, line_no)) {
    throw MeshParseError(line_no, "expected '" + keyword + " <count>', found end of file");
  }
  std::istringstream ls(line);
  std::string word;
  long long count = -1;
  std::string rest;
  if (!(ls >> word >> count) || word != keyword || count < 0 || (ls >> rest)) {
    throw MeshParseError(line_no, "expected '" + keyword + " <count>'");
  }
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;

  const std::size_t nv = parse_header(in, line_no, "VERTICES");
  std::vector<Vec2> vertices;
  vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(in, line, line_no)) {
      throw MeshParseError(line_no, "expected vertex " + std::to_string(i) + ", found end of file");
    }
    std::istringstream ls(line);
    double x = 0.0;
    double y = 0.0;
    std::string rest;
    if (!(ls >> x >> y) || (ls >> rest)) {
      throw MeshParseError(line_no, "expected 'x y' for vertex " + std::to_string(i));
    }
    vertices.emplace_back(x, y);
  }

  const std::size_t nc = parse_header(in, line_no, "CELLS");
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    if (!next_line(in, line, line_no)) {
      throw MeshParseError(line_no, "expected cell " + std::to_string(c) + ", found end of file");
    }
    std::istringstream ls(line);
    long long k = 0;
    if (!(ls >> k) || k < 3) {
      throw MeshParseError(line_no, "cell " + std::to_string(c) + " needs a vertex count >= 3");
    }
    std::vector<std::size_t> loop;
    for (long long i = 0; i < k; ++i) {
      long long v = -1;
      if (!(ls >> v)) {
        throw MeshParseError(line_no, "cell " + std::to_string(c) + " lists fewer than " +
                                          std::to_string(k) + " vertex indices");
      }
      if (v < 0 || static_cast<std::size_t>(v) >= nv) {
        throw MeshParseError(line_no, "cell " + std::to_string(c) + " has vertex index " +
                                          std::to_string(v) + " out of range [0, " +
                                          std::to_string(nv) + ")");
      }
      loop.push_back(static_cast<std::size_t>(v));
    }
    std::string rest;
    if (ls >> rest) {
      throw MeshParseError(line_no, "cell " + std::to_string(c) + " has trailing tokens");
    }
    cells.push_back(std::move(loop));
  }
  if (next_line(in, line, line_no)) {
    throw MeshParseError(line_no, "unexpected content after CELLS block");
  }
  return Mesh::from_polygons(std::move(vertices), std::move(cells));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MeshError("cannot open mesh file " + path.string());
  }
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "VERTICES " << mesh.n_vertices() << '\n';
  out << std::setprecision(17);
  for (const Vec2& v : mesh.vertices()) {
    out << v.x() << ' ' << v.y() << '\n';
  }
  out << "CELLS " << mesh.n_cells() << '\n';
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto loop = mesh.cell_vertices(c);
    out << loop.size();
    for (std::size_t v : loop) {
      out << ' ' << v;
    }
    out << '\n';
  }
}

RegularityReport regularity_report(const Mesh& mesh) {
  RegularityReport r;
  r.face_ratio.resize(mesh.n_cells());
  r.min_diameter = mesh.cell_diameter(0);
  r.max_diameter = mesh.cell_diameter(0);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double hT = mesh.cell_diameter(c);
    double ratio = 0.0;
    for (std::size_t f : mesh.cell_faces(c)) {
      ratio = std::max(ratio, hT * mesh.face_measure(f) / mesh.cell_measure(c));
    }
    r.face_ratio[c] = ratio;
    r.max_ratio = std::max(r.max_ratio, ratio);
    r.min_diameter = std::min(r.min_diameter, hT);
    r.max_diameter = std::max(r.max_diameter, hT);
    ++r.face_count_histogram[mesh.n_cell_faces(c)];
  }
  return r;
}

std::pair<double, double> geometric_identity_defects(const Mesh& mesh) {
  double closure = 0.0;
  double centroid = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    Vec2 flux = Vec2::Zero();
    Mat2 moment = Mat2::Zero();
    double perimeter = 0.0;
    const Vec2& xt = mesh.cell_centroid(c);
    for (std::size_t j = 0; j < mesh.n_cell_faces(c); ++j) {
      const std::size_t f = mesh.cell_faces(c)[j];
      const Vec2 n = mesh.outward_normal(c, j);
      flux += mesh.face_measure(f) * n;
      moment += mesh.face_measure(f) * n * (mesh.face_midpoint(f) - xt).transpose();
      perimeter += mesh.face_measure(f);
    }
    closure = std::max(closure, flux.norm() / perimeter);
    const double area = mesh.cell_measure(c);
    centroid = std::max(centroid, (moment - area * Mat2::Identity()).norm() / area);
  }
  return {closure, centroid};
}

}  // namespace vdns
