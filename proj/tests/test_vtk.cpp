#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "feen/container.hpp"
#include "feen/errors.hpp"
#include "feen/mesh.hpp"
#include "feen/vtk.hpp"

using namespace feen;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("vtk export writes a parseable unstructured grid") {
  const mesh::Mesh m = mesh::generate_unit_square(3);  // 9 nodes, 8 triangles
  Eigen::VectorXd u(9), v(9);
  for (int i = 0; i < 9; ++i) {
    u(i) = m.nodes(i, 0) + 10.0 * m.nodes(i, 1);
    v(i) = 1.0 / 3.0 + i;
  }
  const std::string path = "/tmp/feen_vtk_test.vtk";
  vtk::write_fields(path, m, {{"u", u}, {"v", v}});

  const std::vector<std::string> lines = read_lines(path);
  REQUIRE(lines.size() == 55);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[2] == "ASCII");
  CHECK(lines[3] == "DATASET UNSTRUCTURED_GRID");
  CHECK(lines[4] == "POINTS 9 double");
  // node 4 is the center (0.5, 0.5)
  CHECK(lines[5 + 4] == "0.5 0.5 0");
  CHECK(lines[5 + 9] == "CELLS 8 32");

  // every cell line lists 3 vertices in range
  for (int e = 0; e < 8; ++e) {
    std::istringstream cell(lines[15 + static_cast<size_t>(e)]);
    int k, a, b, c;
    cell >> k >> a >> b >> c;
    CHECK(k == 3);
    CHECK(a >= 0);
    CHECK(c < 9);
  }
  CHECK(lines[23] == "CELL_TYPES 8");
  for (int e = 0; e < 8; ++e) CHECK(lines[24 + static_cast<size_t>(e)] == "5");

  CHECK(lines[32] == "POINT_DATA 9");
  CHECK(lines[33] == "SCALARS u double 1");
  CHECK(lines[34] == "LOOKUP_TABLE default");
  CHECK(lines[35 + 7] == "10.5");  // node 7 = (0.5, 1), u = 0.5 + 10
  CHECK(lines[44] == "SCALARS v double 1");
  // 17 significant digits reproduce the double exactly
  CHECK(std::stod(lines[46]) == 1.0 / 3.0);

  // re-export is byte-identical
  const std::string path2 = "/tmp/feen_vtk_test2.vtk";
  vtk::write_fields(path2, m, {{"u", u}, {"v", v}});
  CHECK(container::file_hash(path) == container::file_hash(path2));

  CHECK_THROWS_AS(vtk::write_fields(path, m, {{"bad", u.head(4)}}), ShapeMismatch);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("vtk export handles fieldless meshes and tetrahedra") {
  mesh::Mesh tet;
  tet.dim = 3;
  tet.nodes.resize(4, 3);
  tet.nodes << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  tet.elements.resize(1, 4);
  tet.elements << 0, 1, 2, 3;
  mesh::orient_elements(tet);
  mesh::detect_boundary(tet);

  const std::string path = "/tmp/feen_vtk_tet.vtk";
  vtk::write_fields(path, tet, {});
  const std::vector<std::string> lines = read_lines(path);
  CHECK(lines[4] == "POINTS 4 double");
  CHECK(lines[9] == "CELLS 1 5");
  CHECK(lines[11] == "CELL_TYPES 1");
  CHECK(lines[12] == "10");
  for (const std::string& l : lines) CHECK(l.find("POINT_DATA") == std::string::npos);
  std::remove(path.c_str());
}
