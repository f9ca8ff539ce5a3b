#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "feen/errors.hpp"
#include "feen/fem.hpp"
#include "feen/mesh.hpp"
#include "feen/rng.hpp"
#include "test_util.hpp"

using namespace feen;
using feen::fem::SparseMatrix;
using feen::testutil::make_mesh;

TEST_CASE("local stiffness and mass on the unit right triangle") {
  auto m = make_mesh(2, {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  SparseMatrix k = fem::assemble_stiffness(m);
  SparseMatrix mm = fem::assemble_mass(m);

  const double k_ref[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(k.coeff(i, j) == doctest::Approx(k_ref[i][j]).epsilon(1e-14));

  // area/12 * (1 + delta), area = 1/2
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(mm.coeff(i, j) == doctest::Approx(i == j ? 1.0 / 12.0 : 1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("local matrices on the reference tetrahedron") {
  auto m = make_mesh(3, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1, 2, 3}});
  SparseMatrix k = fem::assemble_stiffness(m);
  SparseMatrix mm = fem::assemble_mass(m);

  CHECK(k.coeff(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  for (int j = 1; j < 4; ++j) {
    CHECK(k.coeff(0, j) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
    CHECK(k.coeff(j, j) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
  CHECK(k.coeff(1, 2) == doctest::Approx(0.0).epsilon(1e-14));

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(mm.coeff(i, j) == doctest::Approx(i == j ? 1.0 / 60.0 : 1.0 / 120.0).epsilon(1e-14));
}

TEST_CASE("assembled matrices: symmetry, kernel, partition of unity") {
  mesh::Mesh m = mesh::generate_unit_square(9);
  SparseMatrix k = fem::assemble_stiffness(m);
  SparseMatrix mm = fem::assemble_mass(m);

  // Exact symmetry, entry by entry.
  for (int i = 0; i < k.n_rows; ++i)
    for (int kk = k.row_offsets[static_cast<size_t>(i)]; kk < k.row_offsets[static_cast<size_t>(i) + 1]; ++kk) {
      const int j = k.col_indices[static_cast<size_t>(kk)];
      CHECK(k.values[static_cast<size_t>(kk)] == k.coeff(j, i));
    }
  for (int i = 0; i < mm.n_rows; ++i)
    for (int kk = mm.row_offsets[static_cast<size_t>(i)]; kk < mm.row_offsets[static_cast<size_t>(i) + 1]; ++kk) {
      const int j = mm.col_indices[static_cast<size_t>(kk)];
      CHECK(mm.values[static_cast<size_t>(kk)] == mm.coeff(j, i));
    }

  // Constants lie in the stiffness kernel.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_nodes());
  CHECK(k.multiply(ones).lpNorm<Eigen::Infinity>() <= 1e-12);

  // Mass entries sum to the domain area.
  double total = 0.0;
  for (double v : mm.values) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // Positive semidefinite / definite on random vectors.
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(m.num_nodes());
    for (int i = 0; i < x.size(); ++i)
      x(i) = rng::normal(3, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(i), 0);
    CHECK(x.dot(k.multiply(x)) >= -1e-12);
    CHECK(x.dot(mm.multiply(x)) > 0.0);
  }
}

TEST_CASE("interior stencil on the 3x3 square") {
  mesh::Mesh m = mesh::generate_unit_square(3);
  auto sys = fem::assemble_system(m);
  CHECK(sys.dofs.n_interior() == 1);
  SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
  SparseMatrix m_int = fem::restrict_interior(sys.mass, sys.dofs);
  CHECK(k_int.n_rows == 1);
  CHECK(k_int.coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(m_int.coeff(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("restriction extracts the principal submatrix") {
  mesh::Mesh m = mesh::generate_unit_square(5);
  auto sys = fem::assemble_system(m);
  SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
  for (int i = 0; i < sys.dofs.n_interior(); ++i)
    for (int j = 0; j < sys.dofs.n_interior(); ++j)
      CHECK(k_int.coeff(i, j) ==
            sys.stiffness.coeff(sys.dofs.interior_to_node[static_cast<size_t>(i)],
                                sys.dofs.interior_to_node[static_cast<size_t>(j)]));

  // Round trip between interior and full vectors.
  Eigen::VectorXd interior = Eigen::VectorXd::LinSpaced(sys.dofs.n_interior(), 1.0, 2.0);
  Eigen::VectorXd full = fem::extend_vector(interior, sys.dofs);
  for (int b : m.boundary_nodes) CHECK(full(b) == 0.0);
  CHECK((fem::restrict_vector(full, sys.dofs) - interior).norm() == 0.0);
}

TEST_CASE("pcg solves SPD systems to the requested tolerance") {
  mesh::Mesh m = mesh::generate_unit_square(11);
  auto sys = fem::assemble_system(m);
  SparseMatrix a = fem::restrict_interior(sys.stiffness, sys.dofs);

  Eigen::VectorXd b(a.n_rows);
  for (int i = 0; i < b.size(); ++i) b(i) = rng::normal(17, static_cast<std::uint64_t>(i), 0, 0);

  Eigen::VectorXd x = fem::pcg_solve(a, b, 1e-10);
  CHECK((a.multiply(x) - b).norm() <= 1e-10 * b.norm());

  // Independent dense solve agrees.
  Eigen::VectorXd x_dense = a.to_dense().ldlt().solve(b);
  CHECK((x - x_dense).norm() / x_dense.norm() <= 1e-8);

  CHECK(fem::pcg_solve(a, Eigen::VectorXd::Zero(a.n_rows)).norm() == 0.0);
  CHECK_THROWS_AS(fem::pcg_solve(a, b, 1e-10, 2), NotConverged);
}

TEST_CASE("factorized solver matches pcg") {
  mesh::Mesh m = mesh::generate_unit_square(9);
  auto sys = fem::assemble_system(m);
  SparseMatrix a = fem::restrict_interior(sys.stiffness, sys.dofs);
  Eigen::VectorXd b(a.n_rows);
  for (int i = 0; i < b.size(); ++i) b(i) = rng::normal(19, static_cast<std::uint64_t>(i), 0, 0);

  fem::FactorizedSpd llt(a);
  Eigen::VectorXd x1 = llt.solve(b);
  Eigen::VectorXd x2 = fem::pcg_solve(a, b, 1e-12);
  CHECK((x1 - x2).norm() / x2.norm() <= 1e-9);
}

TEST_CASE("degenerate elements are rejected") {
  auto m = make_mesh(2, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}});  // zero area
  CHECK_THROWS_AS(fem::assemble_stiffness(m), DegenerateElement);
}

TEST_CASE("csr matrix basics") {
  std::vector<fem::Triplet> t = {{0, 1, 2.0}, {0, 1, 3.0}, {1, 0, 1.0}, {0, 0, 1.0}};
  SparseMatrix a = SparseMatrix::from_triplets(2, 2, t);
  CHECK(a.nnz() == 3);  // duplicates accumulate
  CHECK(a.coeff(0, 1) == 5.0);
  CHECK(a.coeff(1, 1) == 0.0);
  CHECK(a.row_offsets == std::vector<int>{0, 2, 3});

  SparseMatrix i3 = SparseMatrix::identity(3);
  Eigen::VectorXd v(3);
  v << 1, 2, 3;
  CHECK((i3.multiply(v) - v).norm() == 0.0);
}
