#include "feen/fem.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

#include "feen/errors.hpp"

namespace feen::fem {

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix a;
  a.n_rows = n_rows;
  a.n_cols = n_cols;
  a.row_offsets.assign(static_cast<size_t>(n_rows) + 1, 0);
  for (size_t i = 0; i < t.size();) {
    size_t j = i + 1;
    double v = t[i].value;
    while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col) v += t[j++].value;
    a.col_indices.push_back(t[i].col);
    a.values.push_back(v);
    ++a.row_offsets[static_cast<size_t>(t[i].row) + 1];
    i = j;
  }
  for (int r = 0; r < n_rows; ++r)
    a.row_offsets[static_cast<size_t>(r) + 1] += a.row_offsets[static_cast<size_t>(r)];
  return a;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

Eigen::VectorXd SparseMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != n_cols) throw ShapeMismatch("matrix-vector size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_rows);
  for (int r = 0; r < n_rows; ++r) {
    double s = 0.0;
    for (int k = row_offsets[static_cast<size_t>(r)]; k < row_offsets[static_cast<size_t>(r) + 1]; ++k)
      s += values[static_cast<size_t>(k)] * x(col_indices[static_cast<size_t>(k)]);
    y(r) = s;
  }
  return y;
}

Eigen::MatrixXd SparseMatrix::multiply_matrix(const Eigen::MatrixXd& x) const {
  if (x.rows() != n_cols) throw ShapeMismatch("matrix-matrix size mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_rows, x.cols());
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_offsets[static_cast<size_t>(r)]; k < row_offsets[static_cast<size_t>(r) + 1]; ++k)
      y.row(r) += values[static_cast<size_t>(k)] * x.row(col_indices[static_cast<size_t>(k)]);
  return y;
}

double SparseMatrix::coeff(int i, int j) const {
  const auto b = col_indices.begin() + row_offsets[static_cast<size_t>(i)];
  const auto e = col_indices.begin() + row_offsets[static_cast<size_t>(i) + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values[static_cast<size_t>(it - col_indices.begin())];
}

Eigen::VectorXd SparseMatrix::diagonal() const {
  Eigen::VectorXd d(n_rows);
  for (int i = 0; i < n_rows; ++i) d(i) = coeff(i, i);
  return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> map(
      n_rows, n_cols, static_cast<int>(values.size()), row_offsets.data(), col_indices.data(),
      values.data());
  return Eigen::SparseMatrix<double>(map);
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_rows, n_cols);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_offsets[static_cast<size_t>(r)]; k < row_offsets[static_cast<size_t>(r) + 1]; ++k)
      d(r, col_indices[static_cast<size_t>(k)]) = values[static_cast<size_t>(k)];
  return d;
}

DofMap DofMap::from_mesh(const mesh::Mesh& m) {
  DofMap d;
  d.node_to_interior.assign(static_cast<size_t>(m.num_nodes()), -1);
  for (int v = 0; v < m.num_nodes(); ++v) {
    if (!m.is_boundary(v)) {
      d.node_to_interior[static_cast<size_t>(v)] = static_cast<int>(d.interior_to_node.size());
      d.interior_to_node.push_back(v);
    }
  }
  return d;
}

namespace {

constexpr double kDegenerateVolume = 1e-14;

// Columns hold the P1 basis gradients; volume is returned through `vol`.
Eigen::MatrixXd element_gradients(const mesh::Mesh& m, int e, double& vol) {
  const int dim = m.dim;
  Eigen::MatrixXd J(dim, dim);
  for (int k = 0; k < dim; ++k)
    J.col(k) = (m.nodes.row(m.elements(e, k + 1)) - m.nodes.row(m.elements(e, 0))).transpose();
  const double det = J.determinant();
  vol = det / (dim == 2 ? 2.0 : 6.0);
  if (vol <= kDegenerateVolume)
    throw DegenerateElement("element " + std::to_string(e) + " has non-positive volume");
  Eigen::MatrixXd G(dim, dim + 1);
  const Eigen::MatrixXd JinvT = J.inverse().transpose();
  for (int k = 0; k < dim; ++k) G.col(k + 1) = JinvT.col(k);
  G.col(0) = -G.rightCols(dim).rowwise().sum();
  return G;
}

template <typename LocalFn>
SparseMatrix assemble(const mesh::Mesh& m, LocalFn local) {
  const int vpe = m.verts_per_element();
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m.num_elements()) * vpe * vpe);
  Eigen::MatrixXd loc(vpe, vpe);
  for (int e = 0; e < m.num_elements(); ++e) {
    local(e, loc);
    for (int a = 0; a < vpe; ++a) {
      for (int b = a; b < vpe; ++b) {
        const int i = m.elements(e, a), j = m.elements(e, b);
        const double v = loc(a, b);
        t.push_back({i, j, v});
        if (i != j) t.push_back({j, i, v});
      }
    }
  }
  return SparseMatrix::from_triplets(m.num_nodes(), m.num_nodes(), std::move(t));
}

}  // namespace

SparseMatrix assemble_stiffness(const mesh::Mesh& m) {
  return assemble(m, [&](int e, Eigen::MatrixXd& loc) {
    double vol = 0.0;
    const Eigen::MatrixXd G = element_gradients(m, e, vol);
    loc = vol * (G.transpose() * G);
  });
}

SparseMatrix assemble_mass(const mesh::Mesh& m) {
  // Exact P1 integrals: vol/12 * (1 + delta_ij) on triangles,
  // vol/20 * (1 + delta_ij) on tetrahedra.
  const double off = m.dim == 2 ? 1.0 / 12.0 : 1.0 / 20.0;
  return assemble(m, [&](int e, Eigen::MatrixXd& loc) {
    double vol = 0.0;
    element_gradients(m, e, vol);
    const int vpe = m.verts_per_element();
    loc.setConstant(vpe, vpe, vol * off);
    loc.diagonal().array() *= 2.0;
  });
}

SparseMatrix restrict_interior(const SparseMatrix& a, const DofMap& dofs) {
  if (a.n_rows != dofs.n_nodes() || a.n_cols != dofs.n_nodes())
    throw ShapeMismatch("matrix/dof map size mismatch");
  std::vector<Triplet> t;
  for (int r = 0; r < a.n_rows; ++r) {
    const int ri = dofs.node_to_interior[static_cast<size_t>(r)];
    if (ri < 0) continue;
    for (int k = a.row_offsets[static_cast<size_t>(r)]; k < a.row_offsets[static_cast<size_t>(r) + 1]; ++k) {
      const int ci = dofs.node_to_interior[static_cast<size_t>(a.col_indices[static_cast<size_t>(k)])];
      if (ci >= 0) t.push_back({ri, ci, a.values[static_cast<size_t>(k)]});
    }
  }
  return SparseMatrix::from_triplets(dofs.n_interior(), dofs.n_interior(), std::move(t));
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full, const DofMap& dofs) {
  if (full.size() != dofs.n_nodes()) throw ShapeMismatch("vector/dof map size mismatch");
  Eigen::VectorXd v(dofs.n_interior());
  for (int i = 0; i < dofs.n_interior(); ++i) v(i) = full(dofs.interior_to_node[static_cast<size_t>(i)]);
  return v;
}

Eigen::VectorXd extend_vector(const Eigen::VectorXd& interior, const DofMap& dofs) {
  if (interior.size() != dofs.n_interior()) throw ShapeMismatch("vector/dof map size mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.n_nodes());
  for (int i = 0; i < dofs.n_interior(); ++i) v(dofs.interior_to_node[static_cast<size_t>(i)]) = interior(i);
  return v;
}

Eigen::VectorXd pcg_solve(const SparseMatrix& a, const Eigen::VectorXd& b, double tol,
                          int max_iter) {
  if (a.n_rows != a.n_cols) throw ShapeMismatch("pcg needs a square matrix");
  if (b.size() != a.n_rows) throw ShapeMismatch("right-hand side size mismatch");
  const int n = a.n_rows;
  if (n == 0) return Eigen::VectorXd();
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(n);
  if (max_iter <= 0) max_iter = 10 * n + 100;

  Eigen::VectorXd diag = a.diagonal();
  if ((diag.array() <= 0.0).any()) throw Error("pcg: matrix diagonal is not positive");
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd q = a.multiply(p);
    const double pq = p.dot(q);
    if (pq <= 0.0) throw Error("pcg: matrix is not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    if (r.norm() <= tol * bnorm) {
      // Recurrence residual drifts; accept only the true one.
      const double true_res = (b - a.multiply(x)).norm();
      if (true_res <= tol * bnorm * 1.0000001) return x;
      r = b - a.multiply(x);
      z = inv_diag.cwiseProduct(r);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw NotConverged("pcg did not converge", max_iter, (b - a.multiply(x)).norm() / bnorm);
}

struct FactorizedSpd::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

FactorizedSpd::FactorizedSpd(const SparseMatrix& a) : impl_(new Impl), n_(a.n_rows) {
  if (a.n_rows != a.n_cols) throw ShapeMismatch("factorization needs a square matrix");
  const Eigen::SparseMatrix<double> m = a.to_eigen();
  impl_->llt.compute(m);
  if (impl_->llt.info() != Eigen::Success)
    throw Error("sparse Cholesky factorization failed (matrix not SPD?)");
}

FactorizedSpd::~FactorizedSpd() = default;
FactorizedSpd::FactorizedSpd(FactorizedSpd&&) noexcept = default;
FactorizedSpd& FactorizedSpd::operator=(FactorizedSpd&&) noexcept = default;

Eigen::VectorXd FactorizedSpd::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw ShapeMismatch("right-hand side size mismatch");
  return impl_->llt.solve(b);
}

FemSystem assemble_system(const mesh::Mesh& m) {
  return FemSystem{assemble_stiffness(m), assemble_mass(m), DofMap::from_mesh(m)};
}

}  // namespace feen::fem
