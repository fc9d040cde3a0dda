#include "vdns/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vdns {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("VDNS_DATA_DIR"); env && *env) return env;
  return VDNS_DEFAULT_DATA_DIR;
}

Mesh bundled_mesh(const std::string& name) {
  return load_mesh(data_directory() / "meshes" / (name + ".txt"));
}

void write_vtk(std::ostream& out, const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
               const CellField& p, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2& x : mesh.vertices()) out << num(x.x()) << ' ' << num(x.y()) << " 0\n";

  std::size_t size = 0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) size += mesh.cell_vertices(c).size() + 1;
  out << "CELLS " << mesh.n_cells() << ' ' << size << '\n';
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto loop = mesh.cell_vertices(c);
    out << loop.size();
    for (std::size_t v : loop) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) out << "7\n";

  out << "CELL_DATA " << mesh.n_cells() << '\n';
  out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) out << num(rho[c]) << '\n';
  out << "VECTORS velocity double\n";
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    out << num(u.cells[c].x()) << ' ' << num(u.cells[c].y()) << " 0\n";
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) out << num(p[c]) << '\n';
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const CellField& rho,
               const HybridVelocity& u, const CellField& p, const std::string& title) {
  std::ofstream out = open_for_writing(path);
  write_vtk(out, mesh, rho, u, p, title);
}

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << num(it.value()) << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const Eigen::SparseMatrix<double>& m) {
  std::ofstream out = open_for_writing(path);
  write_matrix_market(out, m);
}

Eigen::SparseMatrix<double> read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || object != "matrix" || format != "coordinate" || field != "real" ||
      (symmetry != "general" && symmetry != "symmetric")) {
    throw std::runtime_error("matrix market: unsupported header '" + line + "'");
  }
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream dims(line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  if (!(dims >> rows >> cols >> nnz)) throw std::runtime_error("matrix market: bad size line");

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("matrix market: truncated entries");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw std::runtime_error("matrix market: index out of range");
    }
    t.emplace_back(i - 1, j - 1, v);
    if (symmetry == "symmetric" && i != j) t.emplace_back(j - 1, i - 1, v);
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace vdns
