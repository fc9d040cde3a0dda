#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vdns {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr std::size_t no_cell = std::numeric_limits<std::size_t>::max();

/// Base class for every error raised while building or reading a mesh.
class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh text; carries the 1-based line number of the offending line.
class MeshParseError : public MeshError {
public:
  MeshParseError(std::size_t line, const std::string& what)
      : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// A face shared by more than two cells, or traversed twice in the same direction.
class MeshTopologyError : public MeshError {
public:
  using MeshError::MeshError;
};

/// A cell whose vertex loop is clockwise or degenerate.
class MeshOrientationError : public MeshError {
public:
  using MeshError::MeshError;
};

struct Face {
  std::size_t v0;
  std::size_t v1;
  std::size_t owner;
  std::size_t neighbor = no_cell;

  bool is_boundary() const { return neighbor == no_cell; }
};

/// Immutable 2D polygonal mesh with precomputed geometry.
///
/// Faces are numbered lexicographically by their sorted vertex pair. The face
/// normal n_F points out of the owner cell, which is the lower-numbered
/// incident cell; on boundary faces it therefore points out of the domain.
class Mesh {
public:
  /// Builds a mesh from CCW vertex loops, deriving faces and geometry.
  /// Throws MeshTopologyError or MeshOrientationError on invalid input.
  static Mesh from_polygons(std::vector<Vec2> vertices,
                            std::vector<std::vector<std::size_t>> cells);

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_faces() const { return faces_.size(); }
  std::size_t n_interior_faces() const { return interior_faces_.size(); }

  const Vec2& vertex(std::size_t i) const { return vertices_[i]; }
  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const std::size_t> cell_vertices(std::size_t cell) const { return cells_[cell]; }

  const Face& face(std::size_t f) const { return faces_[f]; }
  bool is_boundary(std::size_t f) const { return faces_[f].is_boundary(); }
  std::span<const std::size_t> interior_faces() const { return interior_faces_; }
  std::span<const std::size_t> boundary_faces() const { return boundary_faces_; }

  /// Faces of a cell, in the order of its vertex loop (edge i joins vertex i and i+1).
  std::span<const std::size_t> cell_faces(std::size_t cell) const { return cell_faces_[cell]; }
  std::size_t n_cell_faces(std::size_t cell) const { return cell_faces_[cell].size(); }

  /// +1 when the cell owns its j-th face (n_TF = n_F), -1 otherwise.
  double face_sign(std::size_t cell, std::size_t j) const { return face_signs_[cell][j]; }
  /// Outward normal n_TF of the j-th face of a cell.
  Vec2 outward_normal(std::size_t cell, std::size_t j) const {
    return face_signs_[cell][j] * normals_[cell_faces_[cell][j]];
  }
  /// The other cell across face f, or no_cell on the boundary.
  std::size_t other_cell(std::size_t f, std::size_t cell) const {
    const Face& fc = faces_[f];
    return fc.owner == cell ? fc.neighbor : fc.owner;
  }

  const Vec2& face_normal(std::size_t f) const { return normals_[f]; }
  double face_measure(std::size_t f) const { return face_measures_[f]; }
  double face_diameter(std::size_t f) const { return face_measures_[f]; }
  const Vec2& face_midpoint(std::size_t f) const { return midpoints_[f]; }

  double cell_measure(std::size_t cell) const { return cell_measures_[cell]; }
  const Vec2& cell_centroid(std::size_t cell) const { return centroids_[cell]; }
  double cell_diameter(std::size_t cell) const { return diameters_[cell]; }
  double cell_perimeter(std::size_t cell) const;

  /// Global mesh size h = max_T h_T.
  double h() const { return h_; }
  double total_measure() const;

private:
  Mesh() = default;

  std::vector<Vec2> vertices_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<Face> faces_;
  std::vector<std::size_t> interior_faces_;
  std::vector<std::size_t> boundary_faces_;
  std::vector<std::vector<std::size_t>> cell_faces_;
  std::vector<std::vector<double>> face_signs_;

  std::vector<Vec2> normals_;
  std::vector<double> face_measures_;
  std::vector<Vec2> midpoints_;
  std::vector<double> cell_measures_;
  std::vector<Vec2> centroids_;
  std::vector<double> diameters_;
  double h_ = 0.0;
};

struct Rectangle {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

/// nx * ny rectangles covering the domain.
Mesh build_cartesian(std::size_t nx, std::size_t ny, const Rectangle& domain = {});

/// n * n squares on the unit square, each split along its (i,j)-(i+1,j+1) diagonal.
Mesh build_triangular(std::size_t n);

/// Reads the text mesh format (VERTICES / CELLS blocks, `#` comments).
Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::istream& in);
void write_mesh(const Mesh& mesh, std::ostream& out);

struct RegularityReport {
  /// Per cell: max over faces of h_T |F| / |T|.
  std::vector<double> face_ratio;
  double max_ratio = 0.0;
  double min_diameter = 0.0;
  double max_diameter = 0.0;
  /// Number of cells per face count.
  std::map<std::size_t, std::size_t> face_count_histogram;
};

RegularityReport regularity_report(const Mesh& mesh);

/// Largest violation of the closure and centroid identities over all cells:
/// first entry max_T |sum_F |F| n_TF| / sum_F |F|, second entry
/// max_T |sum_F |F| n_TF (x_F - x_T)^T - |T| I| / |T|.
std::pair<double, double> geometric_identity_defects(const Mesh& mesh);

}  // namespace vdns
