#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Sparse>

#include "vdns/mesh.hpp"
#include "vdns/spaces.hpp"

namespace vdns {

/// Bundled data directory: $VDNS_DATA_DIR if set, else the source tree's data/.
std::filesystem::path data_directory();
/// Loads data_directory()/meshes/<name>.txt.
Mesh bundled_mesh(const std::string& name);

/// Legacy ASCII VTK unstructured grid with cell density, velocity and pressure.
void write_vtk(std::ostream& out, const Mesh& mesh, const CellField& rho, const HybridVelocity& u,
               const CellField& p, const std::string& title);
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const CellField& rho,
               const HybridVelocity& u, const CellField& p, const std::string& title);

/// Matrix Market coordinate real general, 1-based indices, explicit entries only.
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<double>& m);
void write_matrix_market(const std::filesystem::path& path, const Eigen::SparseMatrix<double>& m);
/// Reads the coordinate real general/symmetric variants; duplicates are summed.
Eigen::SparseMatrix<double> read_matrix_market(std::istream& in);

}  // namespace vdns
