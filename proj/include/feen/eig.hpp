#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "feen/fem.hpp"
#include "feen/mesh.hpp"

namespace feen::eig {

// Laplacian eigenpairs K phi = lambda M phi on interior degrees of freedom.
// Eigenvalues ascend and are positive; mode columns are M-orthonormal with a
// deterministic sign (largest-magnitude entry positive).
struct EigenBasis {
  Eigen::VectorXd eigenvalues;  // m entries
  Eigen::MatrixXd modes;        // n_interior x m
  fem::DofMap dofs;
  std::uint64_t mesh_id = 0;

  int m() const { return static_cast<int>(eigenvalues.size()); }
  int n_interior() const { return static_cast<int>(modes.rows()); }
};

// Shift-invert Krylov solver at sigma = 0: expands an M-orthonormal subspace
// with w = K^{-1} M v, fully reorthogonalized, and injects deterministic
// pseudo-random restart directions so exactly degenerate pairs are captured.
// Convergence is certified by the pencil residual ||K phi - lambda M phi||_2
// <= tol * lambda for every returned pair.
EigenBasis compute_eigenbasis(const fem::SparseMatrix& k, const fem::SparseMatrix& m,
                              int m_modes, double tol = 1e-8);

// Assembles, restricts to interior dofs, solves, and attaches the dof map.
EigenBasis build_eigenbasis(const mesh::Mesh& mesh, int m_modes, double tol = 1e-8);

// Mode values at mesh nodes, zero on the boundary: n_nodes x m.
Eigen::MatrixXd evaluate_at_nodes(const EigenBasis& basis);

// Mode values at arbitrary points via P1 interpolation: n_points x m.
// Throws NotInDomain naming the offending point.
Eigen::MatrixXd evaluate_at_points(const EigenBasis& basis, const mesh::Mesh& mesh,
                                   const mesh::PointLocator& loc,
                                   const Eigen::MatrixXd& points);

// Content hash of (eigenvalues, modes); binds forcing coefficients and
// trained models to the exact basis they were computed against.
std::uint64_t fingerprint(const EigenBasis& basis);

}  // namespace feen::eig
