#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <vector>

#include "feen/mesh.hpp"

namespace feen::fem {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse row; symmetric matrices are stored in full so that
// A(i,j) and A(j,i) hold bitwise-identical values.
struct SparseMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets;  // size n_rows + 1
  std::vector<int> col_indices;  // ascending within each row
  std::vector<double> values;

  static SparseMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(int n);

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd multiply_matrix(const Eigen::MatrixXd& x) const;
  double coeff(int i, int j) const;  // zero when the entry is absent
  Eigen::VectorXd diagonal() const;
  Eigen::SparseMatrix<double> to_eigen() const;
  Eigen::MatrixXd to_dense() const;
};

// Interior/full index translation for homogeneous Dirichlet problems.
struct DofMap {
  std::vector<int> interior_to_node;  // ascending
  std::vector<int> node_to_interior;  // -1 on boundary nodes

  static DofMap from_mesh(const mesh::Mesh& m);
  int n_interior() const { return static_cast<int>(interior_to_node.size()); }
  int n_nodes() const { return static_cast<int>(node_to_interior.size()); }
};

SparseMatrix assemble_stiffness(const mesh::Mesh& m);
SparseMatrix assemble_mass(const mesh::Mesh& m);

SparseMatrix restrict_interior(const SparseMatrix& a, const DofMap& dofs);
Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full, const DofMap& dofs);
Eigen::VectorXd extend_vector(const Eigen::VectorXd& interior, const DofMap& dofs);

// Preconditioned conjugate gradients with Jacobi preconditioner.
// Converges when ||Ax - b||_2 <= tol * ||b||_2; throws NotConverged otherwise.
Eigen::VectorXd pcg_solve(const SparseMatrix& a, const Eigen::VectorXd& b,
                          double tol = 1e-10, int max_iter = 0);

// Sparse Cholesky factorization cached for repeated solves against one matrix.
class FactorizedSpd {
 public:
  explicit FactorizedSpd(const SparseMatrix& a);
  ~FactorizedSpd();
  FactorizedSpd(FactorizedSpd&&) noexcept;
  FactorizedSpd& operator=(FactorizedSpd&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  int rows() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

struct FemSystem {
  SparseMatrix stiffness;
  SparseMatrix mass;
  DofMap dofs;
};

FemSystem assemble_system(const mesh::Mesh& m);

}  // namespace feen::fem
