#include "feen/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "feen/errors.hpp"
#include "feen/spectral.hpp"

namespace feen::metrics {

namespace {

double norm_sq(const fem::SparseMatrix& a, const Eigen::VectorXd& v) {
  return v.dot(a.multiply(v));
}

// Forward pass for one (sample, snapshot) pair with whatever the variant needs.
Eigen::VectorXd predict_pair(const learn::BranchModel& model, const sim::Dataset& data,
                             learn::TrainingSet::Pair pr, const Eigen::MatrixXd& query_eval) {
  std::optional<Eigen::VectorXd> fc;
  if (model.rule.variant == spectral::Variant::heat_forced_ode && data.f_coeffs.rows() > 0)
    fc = Eigen::VectorXd(data.f_coeffs.row(pr.sample).transpose());
  std::optional<double> t;
  if (!data.snapshot_times.empty())
    t = data.snapshot_times[static_cast<size_t>(pr.snapshot)];
  return learn::forward(model, data.branch_input(pr.sample), fc, t, query_eval);
}

// Reduces per-pair errors to one entry per sample, then means.
Report reduce_by_sample(const std::vector<int>& samples_per_pair,
                        const std::vector<ErrorPair>& errors) {
  std::map<int, std::pair<ErrorPair, int>> grouped;
  for (size_t i = 0; i < errors.size(); ++i) {
    auto& slot = grouped[samples_per_pair[i]];
    slot.first.rel_l2 += errors[i].rel_l2;
    slot.first.rel_h1 += errors[i].rel_h1;
    slot.second += 1;
  }
  Report rep;
  for (const auto& [sample, acc] : grouped) {
    rep.samples.push_back(sample);
    rep.rel_l2.push_back(acc.first.rel_l2 / acc.second);
    rep.rel_h1.push_back(acc.first.rel_h1 / acc.second);
  }
  const double n = static_cast<double>(rep.samples.size());
  for (size_t i = 0; i < rep.samples.size(); ++i) {
    rep.mean_rel_l2 += rep.rel_l2[i] / n;
    rep.mean_rel_h1 += rep.rel_h1[i] / n;
  }
  return rep;
}

Report heldout_on(const learn::BranchModel& model, const learn::TrainingSet& set,
                  const sim::Dataset& data, const Eigen::MatrixXd& query_eval,
                  const fem::FemSystem& quad_sys, const mesh::Mesh* domain,
                  const mesh::PointLocator* loc, const Eigen::MatrixXd* query_points) {
  if (set.test_ids().empty()) throw ShapeMismatch("no held-out samples to evaluate");
  std::vector<int> samples;
  std::vector<ErrorPair> errors;
  samples.reserve(set.test_ids().size());
  errors.reserve(set.test_ids().size());
  for (int id : set.test_ids()) {
    const learn::TrainingSet::Pair pr = set.pair(id);
    const Eigen::VectorXd pred = predict_pair(model, data, pr, query_eval);
    Eigen::VectorXd ref = data.output_at(pr.sample, pr.snapshot);
    if (query_points)
      ref = mesh::interpolate(*domain, *loc, ref, *query_points).col(0);
    samples.push_back(pr.sample);
    errors.push_back(relative_errors(quad_sys, ref, pred));
  }
  return reduce_by_sample(samples, errors);
}

// Clusters near-identical coordinates; returns the sorted distinct values.
std::vector<double> distinct_coords(const Eigen::VectorXd& v, double tol) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  for (double x : s)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

int coord_index(const std::vector<double>& axis, double x, double tol) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), x - tol);
  if (it == axis.end() || std::abs(*it - x) > tol) return -1;
  return static_cast<int>(it - axis.begin());
}

// Structured triangulation when the points form a complete rectangular
// lattice; element diagonals match the generated meshes.
std::optional<Eigen::MatrixXi> lattice_elements(const Eigen::MatrixXd& points, double tol) {
  const int n = static_cast<int>(points.rows());
  const std::vector<double> xs = distinct_coords(points.col(0), tol);
  const std::vector<double> ys = distinct_coords(points.col(1), tol);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  if (nx < 2 || ny < 2 || static_cast<long>(nx) * ny != n) return std::nullopt;

  std::vector<int> id(static_cast<size_t>(nx) * ny, -1);
  for (int r = 0; r < n; ++r) {
    const int ix = coord_index(xs, points(r, 0), tol);
    const int iy = coord_index(ys, points(r, 1), tol);
    if (ix < 0 || iy < 0) return std::nullopt;
    int& slot = id[static_cast<size_t>(iy) * nx + ix];
    if (slot != -1) return std::nullopt;  // duplicate lattice site
    slot = r;
  }
  for (int v : id)
    if (v == -1) return std::nullopt;

  Eigen::MatrixXi elems(2 * (nx - 1) * (ny - 1), 3);
  int t = 0;
  for (int iy = 0; iy < ny - 1; ++iy)
    for (int ix = 0; ix < nx - 1; ++ix) {
      const int a = id[static_cast<size_t>(iy) * nx + ix];
      const int b = id[static_cast<size_t>(iy) * nx + ix + 1];
      const int c = id[static_cast<size_t>(iy + 1) * nx + ix + 1];
      const int d = id[static_cast<size_t>(iy + 1) * nx + ix];
      elems.row(t++) << a, b, c;
      elems.row(t++) << a, c, d;
    }
  return elems;
}

// d strictly inside the circumcircle of (a, b, c); long double keeps the
// predicate stable with the distant enclosing vertices in play.
bool in_circumcircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const long double orient =
      (static_cast<long double>(b.x()) - a.x()) * (static_cast<long double>(c.y()) - a.y()) -
      (static_cast<long double>(b.y()) - a.y()) * (static_cast<long double>(c.x()) - a.x());
  const long double ax = a.x() - d.x(), ay = a.y() - d.y();
  const long double bx = b.x() - d.x(), by = b.y() - d.y();
  const long double cx = c.x() - d.x(), cy = c.y() - d.y();
  const long double det = (ax * ax + ay * ay) * (bx * cy - by * cx) -
                          (bx * bx + by * by) * (ax * cy - ay * cx) +
                          (cx * cx + cy * cy) * (ax * by - ay * bx);
  return (orient > 0 ? det : -det) > 0;
}

// Incremental Delaunay triangulation; point indices refer to `pts` rows.
std::vector<std::array<int, 3>> bowyer_watson(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  // normalize into the unit box so the enclosing triangle scale is uniform
  const Eigen::Vector2d lo(pts.col(0).minCoeff(), pts.col(1).minCoeff());
  const double span = std::max({pts.col(0).maxCoeff() - lo.x(),
                                pts.col(1).maxCoeff() - lo.y(), 1e-30});
  std::vector<Eigen::Vector2d> p(static_cast<size_t>(n) + 3);
  for (int i = 0; i < n; ++i)
    p[static_cast<size_t>(i)] = (Eigen::Vector2d(pts(i, 0), pts(i, 1)) - lo) / span;
  p[static_cast<size_t>(n)] = {-1e3, -1e3};
  p[static_cast<size_t>(n) + 1] = {1e3 + 1.0, -1e3};
  p[static_cast<size_t>(n) + 2] = {0.5, 1e3};

  std::vector<std::array<int, 3>> tris{{n, n + 1, n + 2}};
  for (int i = 0; i < n; ++i) {
    std::map<std::pair<int, int>, int> edge_count;
    std::vector<std::array<int, 3>> keep;
    keep.reserve(tris.size() + 2);
    for (const auto& t : tris) {
      if (in_circumcircle(p[static_cast<size_t>(t[0])], p[static_cast<size_t>(t[1])],
                          p[static_cast<size_t>(t[2])], p[static_cast<size_t>(i)])) {
        for (int e = 0; e < 3; ++e) {
          const int u = t[static_cast<size_t>(e)], v = t[static_cast<size_t>((e + 1) % 3)];
          edge_count[{std::min(u, v), std::max(u, v)}]++;
        }
      } else {
        keep.push_back(t);
      }
    }
    if (edge_count.empty())
      throw DomainError("query points contain a duplicate or are degenerate");
    for (const auto& [edge, count] : edge_count)
      if (count == 1) keep.push_back({edge.first, edge.second, i});
    tris = std::move(keep);
  }

  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris)
    if (t[0] < n && t[1] < n && t[2] < n) out.push_back(t);
  return out;
}

eig::EigenBasis truncate_basis(const eig::EigenBasis& basis, int m) {
  eig::EigenBasis out;
  out.eigenvalues = basis.eigenvalues.head(m);
  out.modes = basis.modes.leftCols(m);
  out.dofs = basis.dofs;
  out.mesh_id = basis.mesh_id;
  return out;
}

}  // namespace

ErrorPair relative_errors(const fem::FemSystem& sys, const Eigen::VectorXd& u_true,
                          const Eigen::VectorXd& u_pred) {
  if (u_true.size() != u_pred.size() || u_true.size() != sys.dofs.n_nodes())
    throw ShapeMismatch("field length does not match the quadrature mesh");
  const Eigen::VectorXd e = u_pred - u_true;
  const double l2_ref = norm_sq(sys.mass, u_true);
  const double h1_ref = l2_ref + norm_sq(sys.stiffness, u_true);
  if (std::sqrt(l2_ref) < 1e-14 || std::sqrt(h1_ref) < 1e-14)
    throw ZeroReference("reference field norm is below 1e-14");
  ErrorPair out;
  const double l2_err = norm_sq(sys.mass, e);
  out.rel_l2 = std::sqrt(l2_err / l2_ref);
  out.rel_h1 = std::sqrt((l2_err + norm_sq(sys.stiffness, e)) / h1_ref);
  return out;
}

ErrorPair relative_errors(const mesh::Mesh& m, const Eigen::VectorXd& u_true,
                          const Eigen::VectorXd& u_pred) {
  return relative_errors(fem::assemble_system(m), u_true, u_pred);
}

Report evaluate_heldout(const learn::BranchModel& model, const learn::TrainingSet& set,
                        const sim::Dataset& data, const eig::EigenBasis& basis,
                        const fem::FemSystem& sys) {
  const Eigen::MatrixXd eval = eig::evaluate_at_nodes(basis);
  return heldout_on(model, set, data, eval, sys, nullptr, nullptr, nullptr);
}

mesh::Mesh triangulate_points(const Eigen::MatrixXd& points, const mesh::Mesh& domain,
                              const mesh::PointLocator& loc) {
  if (domain.dim != 2) throw DomainError("query-grid quadrature is two-dimensional");
  if (points.cols() != 2) throw DomainError("query points must have two coordinates");
  if (points.rows() < 3) throw DomainError("query grids need at least three points");

  const double extent =
      std::max({points.col(0).maxCoeff() - points.col(0).minCoeff(),
                points.col(1).maxCoeff() - points.col(1).minCoeff(), 1e-30});
  const double tol = 1e-9 * extent;

  mesh::Mesh aux;
  aux.dim = 2;
  aux.nodes = points;

  std::vector<std::array<int, 3>> tris;
  if (const auto structured = lattice_elements(points, tol)) {
    aux.elements = *structured;
  } else {
    tris = bowyer_watson(points);
    // keep triangles with real area whose centroid lies in the domain
    std::vector<std::array<int, 3>> kept;
    for (const auto& t : tris) {
      const Eigen::Vector2d a = points.row(t[0]), b = points.row(t[1]), c = points.row(t[2]);
      const double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
      if (std::abs(area2) < 1e-12 * extent * extent) continue;
      const Eigen::Vector2d centroid = (a + b + c) / 3.0;
      if (!loc.try_locate(centroid)) continue;
      kept.push_back(t);
    }
    if (kept.empty()) throw DomainError("no query triangles lie inside the domain");
    aux.elements.resize(static_cast<long>(kept.size()), 3);
    for (size_t r = 0; r < kept.size(); ++r)
      aux.elements.row(static_cast<long>(r)) << kept[r][0], kept[r][1], kept[r][2];
  }

  mesh::orient_elements(aux);
  mesh::detect_boundary(aux);
  return aux;
}

Eigen::MatrixXd densified_lattice(const mesh::Mesh& m, int factor) {
  if (m.dim != 2) throw DomainError("lattice refinement is two-dimensional");
  if (factor < 1) throw DomainError("refinement factor must be at least 1");
  const double extent =
      std::max({m.nodes.col(0).maxCoeff() - m.nodes.col(0).minCoeff(),
                m.nodes.col(1).maxCoeff() - m.nodes.col(1).minCoeff(), 1e-30});
  const double tol = 1e-9 * extent;
  const std::vector<double> xs = distinct_coords(m.nodes.col(0), tol);
  const std::vector<double> ys = distinct_coords(m.nodes.col(1), tol);
  if (xs.size() < 2 || ys.size() < 2)
    throw DomainError("mesh nodes do not span a lattice");

  auto refine = [factor](const std::vector<double>& axis) {
    std::vector<double> out;
    for (size_t i = 0; i + 1 < axis.size(); ++i)
      for (int k = 0; k < factor; ++k)
        out.push_back(axis[i] + (axis[i + 1] - axis[i]) * k / factor);
    out.push_back(axis.back());
    return out;
  };
  const std::vector<double> fx = refine(xs), fy = refine(ys);

  const mesh::PointLocator loc(m);
  std::vector<Eigen::Vector2d> inside;
  inside.reserve(fx.size() * fy.size());
  for (double y : fy)
    for (double x : fx)
      if (loc.try_locate(Eigen::Vector2d(x, y))) inside.emplace_back(x, y);

  Eigen::MatrixXd out(static_cast<long>(inside.size()), 2);
  for (size_t i = 0; i < inside.size(); ++i) out.row(static_cast<long>(i)) = inside[i];
  return out;
}

std::vector<ResolutionRow> resolution_study(const learn::BranchModel& model,
                                            const learn::TrainingSet& set,
                                            const sim::Dataset& data,
                                            const eig::EigenBasis& basis, const mesh::Mesh& m,
                                            const std::vector<Eigen::MatrixXd>& query_grids) {
  if (m.dim != 2) throw DomainError("query-grid studies are two-dimensional");
  const mesh::PointLocator loc(m);
  std::vector<ResolutionRow> rows;
  rows.reserve(query_grids.size());
  for (const Eigen::MatrixXd& grid : query_grids) {
    const Eigen::MatrixXd qeval = eig::evaluate_at_points(basis, m, loc, grid);
    const mesh::Mesh aux = triangulate_points(grid, m, loc);
    const fem::FemSystem aux_sys = fem::assemble_system(aux);
    const Report rep = heldout_on(model, set, data, qeval, aux_sys, &m, &loc, &grid);
    rows.push_back({static_cast<int>(grid.rows()), rep.mean_rel_l2, rep.mean_rel_h1});
  }
  return rows;
}

std::vector<ModeCountRow> mode_count_study(const mesh::Mesh& m, const sim::Dataset& data,
                                           std::vector<int> m_values,
                                           const learn::TrainConfig& cfg) {
  if (m_values.empty()) throw DomainError("mode-count study needs at least one count");
  std::sort(m_values.begin(), m_values.end());
  m_values.erase(std::unique(m_values.begin(), m_values.end()), m_values.end());
  if (m_values.front() < 1) throw DomainError("mode counts must be positive");

  const eig::EigenBasis full = eig::build_eigenbasis(m, m_values.back());
  const fem::FemSystem sys = fem::assemble_system(m);
  const spectral::ReconstructionRule rule = learn::default_rule(data);
  const bool forced = rule.variant == spectral::Variant::heat_forced_ode;

  std::vector<ModeCountRow> rows;
  rows.reserve(m_values.size());
  for (int count : m_values) {
    const eig::EigenBasis basis = truncate_basis(full, count);
    std::optional<sim::Dataset> rebound;
    if (forced) {
      rebound = data;
      sim::attach_forcing_coeffs(*rebound, m, basis);
    }
    const sim::Dataset& bound = rebound ? *rebound : data;
    const learn::TrainingSet set(bound, basis, rule, cfg);
    learn::BranchModel model = learn::init_model(set.n_sensors(), count, rule, cfg.seed);
    const learn::TrainResult res = learn::train(std::move(model), set, cfg);
    const Report rep = evaluate_heldout(res.model, set, bound, basis, sys);
    rows.push_back({count, rep.mean_rel_l2, rep.mean_rel_h1});
  }
  return rows;
}

}  // namespace feen::metrics
