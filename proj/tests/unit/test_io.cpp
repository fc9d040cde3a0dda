#include <cstdlib>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "vdns/io.hpp"
#include "vdns/verify.hpp"

using namespace vdns;

TEST(Vtk, LegacyUnstructuredGridLayout) {
  const Mesh m = build_cartesian(2, 1);
  CellField rho;
  rho.values = {1.5, 2.5};
  HybridVelocity u = HybridVelocity::zero(m);
  u.cells[1] = Vec2(0.25, -1.0);
  const CellField p = CellField::constant(m, 0.0);
  std::ostringstream out;
  write_vtk(out, m, rho, u, p, "two cells");
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(lines[1], "two cells");
  EXPECT_EQ(lines[2], "ASCII");
  EXPECT_EQ(lines[3], "DATASET UNSTRUCTURED_GRID");
  const std::string text = out.str();
  EXPECT_NE(text.find("POINTS 6 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 2 10"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 2\n7\n7\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS density double 1\nLOOKUP_TABLE default\n1.5\n2.5\n"),
            std::string::npos);
  EXPECT_NE(text.find("VECTORS velocity double\n0 0 0\n0.25 -1 0\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS pressure double 1"), std::string::npos);
}

TEST(MatrixMarket, RoundTripIsExact) {
  Eigen::SparseMatrix<double> a(4, 3);
  a.insert(0, 0) = 1.0 / 3.0;
  a.insert(3, 2) = -2e-17;
  a.insert(1, 1) = 12345.678901234567;
  a.makeCompressed();
  std::stringstream buf;
  write_matrix_market(buf, a);
  EXPECT_EQ(buf.str().rfind("%%MatrixMarket matrix coordinate real general\n4 3 3\n", 0), 0u);
  const Eigen::SparseMatrix<double> b = read_matrix_market(buf);
  ASSERT_EQ(b.rows(), 4);
  ASSERT_EQ(b.cols(), 3);
  EXPECT_EQ(Eigen::MatrixXd(a - b).norm(), 0.0);
}

TEST(MatrixMarket, SymmetricVariantMirrorsEntries) {
  std::istringstream in(
      "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2\n3 1 -1\n2 2 4\n");
  const Eigen::MatrixXd m(read_matrix_market(in));
  EXPECT_EQ(m(0, 2), -1.0);
  EXPECT_EQ(m(2, 0), -1.0);
  EXPECT_EQ(m(1, 1), 4.0);
  EXPECT_EQ(m(2, 2), 0.0);
}

TEST(MatrixMarket, RejectsBadInput) {
  std::istringstream header("%%MatrixMarket matrix array real general\n2 2\n");
  EXPECT_THROW(read_matrix_market(header), std::runtime_error);
  std::istringstream range("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
  EXPECT_THROW(read_matrix_market(range), std::runtime_error);
  std::istringstream truncated("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
  EXPECT_THROW(read_matrix_market(truncated), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(read_matrix_market(empty), std::runtime_error);
}

TEST(DataDirectory, EnvironmentOverride) {
  const char* old = std::getenv("VDNS_DATA_DIR");
  const std::string saved = old ? old : "";
  setenv("VDNS_DATA_DIR", "/nonexistent/vdns", 1);
  EXPECT_EQ(data_directory(), std::filesystem::path("/nonexistent/vdns"));
  EXPECT_ANY_THROW(bundled_mesh("hexa_0"));
  if (old) {
    setenv("VDNS_DATA_DIR", saved.c_str(), 1);
  } else {
    unsetenv("VDNS_DATA_DIR");
  }
  EXPECT_TRUE(std::filesystem::exists(data_directory() / "meshes" / "hexa_0.txt"));
}
