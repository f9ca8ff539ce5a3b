#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "feen/errors.hpp"
#include "feen/mesh.hpp"
#include "feen/rng.hpp"

using namespace feen;
using feen::mesh::Mesh;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::set<int> boundary_set(const Mesh& m) {
  return {m.boundary_nodes.begin(), m.boundary_nodes.end()};
}

}  // namespace

TEST_CASE("unit square: smallest meshes") {
  Mesh m2 = mesh::generate_unit_square(2);
  CHECK(m2.num_nodes() == 4);
  CHECK(m2.num_elements() == 2);
  CHECK(m2.boundary_nodes.size() == 4);
  CHECK(m2.num_interior() == 0);

  Mesh m3 = mesh::generate_unit_square(3);
  CHECK(m3.num_nodes() == 9);
  CHECK(m3.num_elements() == 8);
  CHECK(m3.boundary_nodes.size() == 8);
  CHECK(m3.num_interior() == 1);
  // The single interior node is the center.
  int interior = -1;
  for (int v = 0; v < 9; ++v)
    if (!m3.is_boundary(v)) interior = v;
  CHECK(m3.nodes(interior, 0) == doctest::Approx(0.5));
  CHECK(m3.nodes(interior, 1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(mesh::generate_unit_square(1), InvalidGeometry);
}

TEST_CASE("unit square: counts, area, orientation") {
  Mesh m = mesh::generate_unit_square(35);
  CHECK(m.num_nodes() == 1225);
  CHECK(m.num_elements() == 2 * 34 * 34);
  CHECK(m.boundary_nodes.size() == 4 * 34);
  CHECK(mesh::domain_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
  for (int e = 0; e < m.num_elements(); ++e) CHECK(mesh::element_volume(m, e) > 0.0);
}

TEST_CASE("boundary detection is independent of element order") {
  Mesh m = mesh::generate_unit_square(9);
  const auto before = boundary_set(m);

  // Deterministic shuffle of element rows.
  std::vector<int> perm(m.num_elements());
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = m.num_elements() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng::bits(7, static_cast<std::uint64_t>(i), 0, 0) %
                                   static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  Eigen::MatrixXi shuffled(m.num_elements(), 3);
  for (int e = 0; e < m.num_elements(); ++e) shuffled.row(e) = m.elements.row(perm[static_cast<size_t>(e)]);
  m.elements = shuffled;
  mesh::detect_boundary(m);
  CHECK(boundary_set(m) == before);
}

TEST_CASE("point location: interior, vertex, tolerance, outside") {
  Mesh m = mesh::generate_unit_square(9);
  mesh::PointLocator loc(m);

  // Centroid of element 0 resolves to element 0 with equal barycentrics.
  Eigen::VectorXd c(2);
  c << (m.nodes(m.elements(0, 0), 0) + m.nodes(m.elements(0, 1), 0) + m.nodes(m.elements(0, 2), 0)) / 3.0,
      (m.nodes(m.elements(0, 0), 1) + m.nodes(m.elements(0, 1), 1) + m.nodes(m.elements(0, 2), 1)) / 3.0;
  auto hit = loc.locate(c);
  CHECK(hit.element == 0);
  for (int k = 0; k < 3; ++k) CHECK(hit.bary(k) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // A vertex: barycentrics are a unit coordinate vector.
  Eigen::VectorXd v = m.nodes.row(40).transpose();
  auto vh = loc.locate(v);
  CHECK(vh.bary.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vh.bary.minCoeff() == doctest::Approx(0.0).epsilon(1e-12));

  // Slightly outside the boundary is accepted within tolerance.
  Eigen::VectorXd eps(2);
  eps << 0.5, -1e-11;
  CHECK_NOTHROW(loc.locate(eps));

  Eigen::VectorXd out(2);
  out << 0.5, -1e-3;
  CHECK_THROWS_AS(loc.locate(out), NotInDomain);
  Eigen::VectorXd far(2);
  far << 1.5, 0.5;
  CHECK_THROWS_AS(loc.locate(far), NotInDomain);
}

TEST_CASE("point location reconstructs query coordinates") {
  Mesh m = mesh::generate_unit_square(13);
  mesh::PointLocator loc(m);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd x(2);
    x << rng::uniform(11, static_cast<std::uint64_t>(i), 0, 0),
        rng::uniform(11, static_cast<std::uint64_t>(i), 1, 0);
    auto hit = loc.locate(x);
    CHECK(hit.bary.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hit.bary.minCoeff() >= -mesh::kTolBarycentric);
    Eigen::VectorXd rec = Eigen::VectorXd::Zero(2);
    for (int k = 0; k < 3; ++k) rec += hit.bary(k) * m.nodes.row(m.elements(hit.element, k)).transpose();
    CHECK((rec - x).norm() <= 1e-10);
  }
}

TEST_CASE("P1 interpolation reproduces affine fields exactly") {
  Mesh m = mesh::generate_unit_square(7);
  mesh::PointLocator loc(m);
  Eigen::MatrixXd nodal(m.num_nodes(), 1);
  for (int v = 0; v < m.num_nodes(); ++v) nodal(v, 0) = 2.0 * m.nodes(v, 0) + 3.0 * m.nodes(v, 1) - 1.0;
  Eigen::MatrixXd pts(50, 2);
  for (int i = 0; i < 50; ++i) {
    pts(i, 0) = rng::uniform(13, static_cast<std::uint64_t>(i), 0, 0);
    pts(i, 1) = rng::uniform(13, static_cast<std::uint64_t>(i), 1, 0);
  }
  Eigen::MatrixXd vals = mesh::interpolate(m, loc, nodal, pts);
  for (int i = 0; i < 50; ++i)
    CHECK(vals(i, 0) == doctest::Approx(2.0 * pts(i, 0) + 3.0 * pts(i, 1) - 1.0).epsilon(1e-12));
}

TEST_CASE("fins geometry: area, conformity, landmarks") {
  mesh::FinsParams p;  // 2 x 1 base, 4 fins 0.1 x 0.5
  Mesh m = mesh::generate_fins(p, 0.05);
  const double area = 2.0 * 1.0 + 4.0 * 0.1 * 0.5;
  CHECK(mesh::domain_volume(m) == doctest::Approx(area).epsilon(1e-12));
  for (int e = 0; e < m.num_elements(); ++e) CHECK(mesh::element_volume(m, e) > 0.0);
  CHECK(m.num_interior() > 0);

  // Snapped lattice: fin tips and base corners appear as nodes.
  bool has_tip = false, has_corner = false;
  for (int v = 0; v < m.num_nodes(); ++v) {
    if (std::abs(m.nodes(v, 1) - 1.5) < 1e-12) has_tip = true;
    if (std::abs(m.nodes(v, 0) - 2.0) < 1e-12 && std::abs(m.nodes(v, 1)) < 1e-12) has_corner = true;
  }
  CHECK(has_tip);
  CHECK(has_corner);

  // Fin side walls are boundary: a point on a gap segment of the top base
  // edge must be boundary, a point inside a fin must not be.
  mesh::PointLocator loc(m);
  Eigen::VectorXd inside_fin(2);
  const double gap = (2.0 - 4 * 0.1) / 5.0;
  inside_fin << gap + 0.05, 1.25;
  CHECK_NOTHROW(loc.locate(inside_fin));
  Eigen::VectorXd in_gap(2);
  in_gap << gap / 2.0, 1.25;  // between fins, above the base
  CHECK_THROWS_AS(loc.locate(in_gap), NotInDomain);

  CHECK(mesh::generate_fins(p, 0.05).num_nodes() == m.num_nodes());  // deterministic

  mesh::FinsParams bad = p;
  bad.fin_width = 0.6;  // 4 * 0.6 > 2
  CHECK_THROWS_AS(mesh::generate_fins(bad, 0.05), InvalidGeometry);

  mesh::FinsParams none = p;
  none.fin_count = 0;
  Mesh rect = mesh::generate_fins(none, 0.1);
  CHECK(mesh::domain_volume(rect) == doctest::Approx(2.0).epsilon(1e-12));
}

static const char* kSquareMsh = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
1
2 1 "plate"
$EndPhysicalNames
$Nodes
1 4 1 4
2 1 0 4
1
2
3
4
0 0 0
1 0 0
1 1 0
0 1 0
$EndNodes
$Elements
1 2 1 2
2 1 2 2
1 1 2 3
2 1 4 3
$EndElements
)";

TEST_CASE("msh reader: square with one clockwise triangle") {
  auto path = write_temp("feen_square.msh", kSquareMsh);
  Mesh m = mesh::read_msh(path);
  CHECK(m.dim == 2);
  CHECK(m.num_nodes() == 4);
  CHECK(m.num_elements() == 2);
  CHECK(mesh::domain_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
  for (int e = 0; e < m.num_elements(); ++e) CHECK(mesh::element_volume(m, e) > 0.0);
  CHECK(m.boundary_nodes.size() == 4);
  std::remove(path.c_str());
}

static const char* kTwoTetMsh = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$Nodes
1 5 1 5
3 1 0 5
1
2
3
4
5
0 0 0
1 0 0
0 1 0
0 0 1
1 1 1
$EndNodes
$Elements
1 2 1 2
3 1 4 2
1 1 2 3 4
2 5 2 3 4
$EndElements
)";

TEST_CASE("msh reader: two tetrahedra sharing a face") {
  auto path = write_temp("feen_twotet.msh", kTwoTetMsh);
  Mesh m = mesh::read_msh(path);
  CHECK(m.dim == 3);
  CHECK(m.num_nodes() == 5);
  CHECK(m.num_elements() == 2);
  for (int e = 0; e < 2; ++e) CHECK(mesh::element_volume(m, e) > 0.0);
  // Every node touches the surface; the shared face is interior.
  CHECK(m.boundary_nodes.size() == 5);
  CHECK(m.num_interior() == 0);
  std::remove(path.c_str());
}

static const char* kMixedMsh = R"($MeshFormat
4.1 0 8
$EndMeshFormat
$Nodes
1 5 1 5
2 1 0 5
1
2
3
4
5
0 0 0
1 0 0
1 1 0
0 1 0
2 0 0
$EndNodes
$Elements
2 2 1 2
2 1 2 1
1 1 2 3
2 1 3 1
2 2 3 4 5
$EndElements
)";

TEST_CASE("msh reader: quads are rejected") {
  auto path = write_temp("feen_mixed.msh", kMixedMsh);
  CHECK_THROWS_AS(mesh::read_msh(path), UnsupportedElement);
  std::remove(path.c_str());
}

TEST_CASE("msh reader: wrong version and truncation raise parse errors") {
  auto bad = write_temp("feen_bad.msh", "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
  CHECK_THROWS_AS(mesh::read_msh(bad), ParseError);
  std::remove(bad.c_str());

  auto trunc = write_temp("feen_trunc.msh", "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n$Nodes\n1 4 1 4\n");
  CHECK_THROWS_AS(mesh::read_msh(trunc), ParseError);
  std::remove(trunc.c_str());

  try {
    auto p = write_temp("feen_badver.msh", "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    mesh::read_msh(p);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("geometry spec dispatch") {
  mesh::GeometrySpec gs;
  gs.kind = mesh::GeometrySpec::Kind::unit_square;
  gs.resolution = 1.0 / 34.0;
  Mesh m = mesh::generate(gs);
  CHECK(m.num_nodes() == 1225);
}
