#pragma once

#include <Eigen/Dense>

#include <vector>

#include "feen/eig.hpp"
#include "feen/fem.hpp"
#include "feen/learn.hpp"
#include "feen/mesh.hpp"
#include "feen/sim.hpp"

namespace feen::metrics {

struct ErrorPair {
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
};

// Mesh-quadrature relative errors of nodal fields:
//   rel_l2^2 = e'Me / u'Mu,  rel_h1^2 = e'(M+K)e / u'(M+K)u.
// Throws ZeroReference when a reference norm falls below 1e-14.
ErrorPair relative_errors(const fem::FemSystem& sys, const Eigen::VectorXd& u_true,
                          const Eigen::VectorXd& u_pred);
ErrorPair relative_errors(const mesh::Mesh& m, const Eigen::VectorXd& u_true,
                          const Eigen::VectorXd& u_pred);

// Held-out accuracy.  Heat errors reduce uniformly over snapshots first, then
// over samples, so the arrays carry one entry per held-out sample.
struct Report {
  std::vector<int> samples;  // held-out sample indices, ascending
  std::vector<double> rel_l2, rel_h1;
  double mean_rel_l2 = 0.0;
  double mean_rel_h1 = 0.0;

  static constexpr const char* kAggregation = "uniform over snapshots, then samples";
};

Report evaluate_heldout(const learn::BranchModel& model, const learn::TrainingSet& set,
                        const sim::Dataset& data, const eig::EigenBasis& basis,
                        const fem::FemSystem& sys);

// Quadrature mesh over a 2D query point set: full rectangular lattices get the
// structured triangulation (diagonal matching the generated meshes), anything
// else a Delaunay triangulation with triangles outside the domain discarded by
// the centroid test.  Node order equals query row order.
mesh::Mesh triangulate_points(const Eigen::MatrixXd& points, const mesh::Mesh& domain,
                              const mesh::PointLocator& loc);

// Cartesian refinement of the mesh's node lattice: every coordinate interval
// split into `factor` parts, combinations outside the domain dropped.
Eigen::MatrixXd densified_lattice(const mesh::Mesh& m, int factor);

struct ResolutionRow {
  int n_points = 0;
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
};

// Held-out errors of one trained model on each query grid, without
// retraining.  References are the ground-truth fields interpolated at the
// query points; norms use quadrature on the auxiliary triangulation.
std::vector<ResolutionRow> resolution_study(const learn::BranchModel& model,
                                            const learn::TrainingSet& set,
                                            const sim::Dataset& data,
                                            const eig::EigenBasis& basis, const mesh::Mesh& m,
                                            const std::vector<Eigen::MatrixXd>& query_grids);

struct ModeCountRow {
  int m = 0;
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
};

// Independently initialized and trained model per mode count; rows ascend in
// m.  The basis is computed once at the largest count and truncated, which
// preserves the leading eigenpairs exactly.
std::vector<ModeCountRow> mode_count_study(const mesh::Mesh& m, const sim::Dataset& data,
                                           std::vector<int> m_values,
                                           const learn::TrainConfig& cfg);

}  // namespace feen::metrics
