#include "feen/eig.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "feen/container.hpp"
#include "feen/errors.hpp"
#include "feen/rng.hpp"

namespace feen::eig {

namespace {

constexpr std::uint64_t kSeed = 0x5EEDBA5Eull;

// Deterministic pseudo-random direction for chain starts and restarts.
Eigen::VectorXd injection_vector(int n, int counter) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v(i) = rng::normal(kSeed, static_cast<std::uint64_t>(counter),
                       static_cast<std::uint64_t>(i), 0);
  return v;
}

struct RitzSet {
  Eigen::VectorXd theta;      // descending, largest first
  Eigen::MatrixXd y;          // subspace coefficients, one column per pair
  Eigen::VectorXd heuristic;  // cheap residual estimate per pair
};

}  // namespace

EigenBasis compute_eigenbasis(const fem::SparseMatrix& k, const fem::SparseMatrix& m,
                              int m_modes, double tol) {
  if (k.n_rows != k.n_cols || m.n_rows != m.n_cols || k.n_rows != m.n_rows)
    throw ShapeMismatch("stiffness/mass dimension mismatch");
  const int n = k.n_rows;
  if (m_modes < 1) throw InsufficientDofs("at least one mode must be requested");
  if (m_modes > n)
    throw InsufficientDofs("requested " + std::to_string(m_modes) + " modes but only " +
                           std::to_string(n) + " interior dofs exist");

  const fem::FactorizedSpd k_inv(k);

  const int jmax = std::min(n, 3 * m_modes + 200);
  const int inject_every = std::max(25, m_modes / 2);

  Eigen::MatrixXd v(n, jmax);        // M-orthonormal subspace columns
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(jmax, jmax);  // projected operator
  Eigen::VectorXd rem = Eigen::VectorXd::Zero(jmax);      // unabsorbed residual per column

  int jtot = 0;  // columns present
  int jexp = 0;  // columns already expanded through the operator
  int injections = 0;
  int since_inject = 0;
  int since_check = 0;
  int check_every = 10;
  double best_residual = std::numeric_limits<double>::infinity();

  auto m_norm = [&](const Eigen::VectorXd& x) { return std::sqrt(x.dot(m.multiply(x))); };

  // Two classical Gram-Schmidt passes against all current columns; returns
  // the projection coefficients of the first pass (the operator column).
  auto orthogonalize = [&](Eigen::VectorXd& w, Eigen::VectorXd& coeffs) {
    coeffs = Eigen::VectorXd::Zero(jtot);
    for (int pass = 0; pass < 2; ++pass) {
      if (jtot == 0) break;
      const Eigen::VectorXd h = v.leftCols(jtot).transpose() * m.multiply(w);
      w.noalias() -= v.leftCols(jtot) * h;
      coeffs.head(jtot) += h;
    }
  };

  auto inject = [&]() -> bool {
    for (int attempt = 0; attempt < 32; ++attempt) {
      Eigen::VectorXd w = injection_vector(n, injections * 32 + attempt);
      const double pre = m_norm(w);
      Eigen::VectorXd coeffs;
      orthogonalize(w, coeffs);
      const double nrm = m_norm(w);
      if (nrm > 1e-7 * pre) {
        v.col(jtot++) = w / nrm;
        ++injections;
        since_inject = 0;
        return true;
      }
    }
    return false;
  };

  auto rayleigh_ritz = [&]() -> RitzSet {
    const Eigen::MatrixXd tj = t.topLeftCorner(jexp, jexp).selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tj);
    RitzSet rs;
    const int take = std::min(m_modes, jexp);
    rs.theta.resize(take);
    rs.y.resize(jexp, take);
    rs.heuristic.resize(take);
    for (int i = 0; i < take; ++i) {
      const int src = jexp - 1 - i;  // largest theta first
      rs.theta(i) = es.eigenvalues()(src);
      rs.y.col(i) = es.eigenvectors().col(src);
      double acc = 0.0;
      for (int c = 0; c < jexp; ++c) acc += std::pow(rem(c) * rs.y(c, i), 2);
      rs.heuristic(i) = std::sqrt(acc);
    }
    return rs;
  };

  auto try_accept = [&](const RitzSet& rs, EigenBasis& out) -> bool {
    if (rs.theta.size() < m_modes) return false;
    // Shift-invert maps smallest lambda to largest theta; thetas must be positive.
    if (rs.theta.minCoeff() <= 0.0) return false;
    Eigen::MatrixXd phi = v.leftCols(jexp) * rs.y;
    double worst = 0.0;
    for (int i = 0; i < m_modes; ++i) {
      const double lambda = 1.0 / rs.theta(i);
      const Eigen::VectorXd col = phi.col(i);
      const Eigen::VectorXd r = k.multiply(col) - lambda * m.multiply(col);
      worst = std::max(worst, r.norm() / lambda);
    }
    best_residual = std::min(best_residual, worst);
    if (worst > tol) return false;

    // theta descends, so lambda = 1/theta already ascends.
    out.eigenvalues.resize(m_modes);
    out.modes.resize(n, m_modes);
    for (int i = 0; i < m_modes; ++i) {
      out.eigenvalues(i) = 1.0 / rs.theta(i);
      out.modes.col(i) = phi.col(i);
    }
    // Deterministic sign: first largest-magnitude entry made positive.
    for (int i = 0; i < m_modes; ++i) {
      int arg = 0;
      double mag = -1.0;
      for (int r = 0; r < n; ++r) {
        const double a = std::abs(out.modes(r, i));
        if (a > mag) {
          mag = a;
          arg = r;
        }
      }
      if (out.modes(arg, i) < 0.0) out.modes.col(i) = -out.modes.col(i);
    }
    return true;
  };

  if (!inject()) throw NotConverged("could not seed the Krylov subspace", 0, 0.0);

  EigenBasis result;
  while (true) {
    if (jexp < jtot) {
      // Expand the next column through K^{-1} M.
      const int c = jexp;
      const Eigen::VectorXd vc = v.col(c);
      Eigen::VectorXd w = k_inv.solve(m.multiply(vc));
      Eigen::VectorXd coeffs;
      orthogonalize(w, coeffs);
      t.col(c).head(jtot) = coeffs;
      t.row(c).head(jtot) = coeffs.transpose();
      const double beta = m_norm(w);
      const double scale = std::max(1.0, t.diagonal().head(jtot).cwiseAbs().maxCoeff());
      if (beta > 1e-12 * scale && jtot < jmax) {
        v.col(jtot) = w / beta;
        t(jtot, c) = beta;
        t(c, jtot) = beta;
        ++jtot;
      } else {
        rem(c) = beta;
      }
      ++jexp;
      ++since_inject;
      ++since_check;
    } else if (jtot < jmax && jtot < n) {
      if (!inject()) break;  // no orthogonal direction left
      continue;
    } else {
      break;  // subspace exhausted
    }

    if (since_inject >= inject_every && jtot < jmax && jtot < n) inject();

    if (since_check >= check_every && jexp >= m_modes) {
      since_check = 0;
      check_every = std::max(10, jexp / 8);
      const RitzSet rs = rayleigh_ritz();
      bool plausible = true;
      for (int i = 0; i < rs.theta.size() && plausible; ++i)
        if (!(rs.heuristic(i) <= 0.5 * tol * rs.theta(i))) plausible = false;
      if (plausible && try_accept(rs, result)) {
        result.mesh_id = 0;
        return result;
      }
    }
  }

  // Subspace exhausted or budget reached: final Rayleigh-Ritz attempt.
  if (jexp >= m_modes) {
    const RitzSet rs = rayleigh_ritz();
    if (try_accept(rs, result)) return result;
  }
  throw NotConverged("eigensolver did not reach the requested residual", jexp, best_residual);
}

EigenBasis build_eigenbasis(const mesh::Mesh& mesh, int m_modes, double tol) {
  const fem::FemSystem sys = fem::assemble_system(mesh);
  if (sys.dofs.n_interior() == 0)
    throw InsufficientDofs("mesh has no interior degrees of freedom");
  const fem::SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
  const fem::SparseMatrix m_int = fem::restrict_interior(sys.mass, sys.dofs);
  EigenBasis basis = compute_eigenbasis(k_int, m_int, m_modes, tol);
  basis.dofs = sys.dofs;
  basis.mesh_id = container::mesh_hash(mesh);
  return basis;
}

std::uint64_t fingerprint(const EigenBasis& basis) {
  return container::vector_hash(basis.eigenvalues, container::matrix_hash(basis.modes));
}

Eigen::MatrixXd evaluate_at_nodes(const EigenBasis& basis) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(basis.dofs.n_nodes(), basis.m());
  for (int i = 0; i < basis.dofs.n_interior(); ++i)
    full.row(basis.dofs.interior_to_node[static_cast<size_t>(i)]) = basis.modes.row(i);
  return full;
}

Eigen::MatrixXd evaluate_at_points(const EigenBasis& basis, const mesh::Mesh& mesh,
                                   const mesh::PointLocator& loc,
                                   const Eigen::MatrixXd& points) {
  if (points.cols() != mesh.dim) throw ShapeMismatch("query point dimension mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.rows(), basis.m());
  for (int q = 0; q < points.rows(); ++q) {
    auto hit = loc.try_locate(points.row(q).transpose());
    if (!hit) throw NotInDomain("query point " + std::to_string(q) + " is outside the mesh");
    for (int kv = 0; kv <= mesh.dim; ++kv) {
      const int node = mesh.elements(hit->element, kv);
      const int idx = basis.dofs.node_to_interior[static_cast<size_t>(node)];
      if (idx >= 0) out.row(q) += hit->bary(kv) * basis.modes.row(idx);
    }
  }
  return out;
}

}  // namespace feen::eig
