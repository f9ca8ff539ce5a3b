#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "feen/eig.hpp"
#include "feen/fem.hpp"
#include "feen/grf.hpp"
#include "feen/mesh.hpp"

namespace feen::sim {

enum class Problem { poisson, heat_homogeneous, heat_forced };

std::string problem_name(Problem p);
Problem problem_from_name(const std::string& name);

struct ProblemSpec {
  Problem problem = Problem::poisson;
  double diffusivity = 0.02;
  double t_final = 1.0;
  double dt = 0.0025;
  std::vector<double> snapshot_times;  // heat problems; each a multiple of dt in (0, t_final]
};

void validate(const ProblemSpec& spec);

bool is_heat(Problem p);

// Default snapshot grid {0.1, 0.2, ..., 1.0} scaled to t_final.
std::vector<double> default_snapshot_times(double t_final);

// Weak Poisson solve K u = M f on interior dofs, homogeneous Dirichlet;
// f is nodal data on the full mesh, the result is zero on the boundary.
Eigen::VectorXd solve_poisson(const fem::FemSystem& sys, const Eigen::VectorXd& f_nodal,
                              double tol = 1e-10);
Eigen::VectorXd solve_poisson(const mesh::Mesh& m, const Eigen::VectorXd& f_nodal,
                              double tol = 1e-10);

// Solution of K d = M 1 scaled so max d = 1: a smooth field vanishing on the
// boundary, used to make random initial conditions admissible.
Eigen::VectorXd compute_cutoff_field(const fem::FemSystem& sys);
Eigen::VectorXd compute_cutoff_field(const mesh::Mesh& m);

Eigen::VectorXd make_admissible_ic(const Eigen::VectorXd& raw_field,
                                   const Eigen::VectorXd& cutoff);

// Implicit Euler for u_t = D lap u + f with homogeneous Dirichlet walls:
// (M + dt D K) u_next = M (u_prev + dt f) on interior dofs.
class HeatStepper {
 public:
  HeatStepper(const fem::FemSystem& sys, double diffusivity, double dt);

  Eigen::VectorXd step(const Eigen::VectorXd& u_full, const Eigen::VectorXd& f_full) const;

  // Snapshots at the requested times (rows), spanning round(t_final/dt) steps.
  Eigen::MatrixXd run(const Eigen::VectorXd& u0_full, const Eigen::VectorXd& f_full,
                      double t_final, const std::vector<double>& snapshot_times) const;

  double dt() const { return dt_; }

 private:
  const fem::FemSystem& sys_;
  fem::FactorizedSpd op_;
  double dt_;
};

Eigen::VectorXd step_heat(const mesh::Mesh& m, const ProblemSpec& spec,
                          const Eigen::VectorXd& u_full, const Eigen::VectorXd& f_full);

struct Dataset {
  Problem problem = Problem::poisson;
  Eigen::MatrixXd inputs_u0;  // n_samples x n_nodes (heat problems)
  Eigen::MatrixXd inputs_f;   // n_samples x n_nodes (poisson, heat_forced)
  // poisson: n_samples x n_nodes; heat: n_samples x (n_snapshots * n_nodes),
  // snapshot-major blocks within each row.
  Eigen::MatrixXd outputs;
  std::vector<double> snapshot_times;
  double diffusivity = 0.0;
  grf::GrfSpec grf;
  std::uint64_t mesh_id = 0;

  // Forcing projected on an eigenbasis, precomputed at build time so the
  // forced reconstruction never re-projects: n_samples x m.
  Eigen::MatrixXd f_coeffs;
  std::uint64_t f_basis_hash = 0;

  int n_samples() const { return static_cast<int>(outputs.rows()); }
  int n_nodes() const;
  int n_snapshots() const {
    return snapshot_times.empty() ? 1 : static_cast<int>(snapshot_times.size());
  }
  Eigen::VectorXd output_at(int sample, int snapshot) const;
  Eigen::VectorXd branch_input(int sample) const;  // u0 for heat, f for poisson
};

Dataset build_dataset(const mesh::Mesh& m, const ProblemSpec& spec, const grf::GrfSpec& grf_spec,
                      int n_samples);

// Projects each sample's forcing onto the basis (coords = Phi^T M f).
void attach_forcing_coeffs(Dataset& data, const mesh::Mesh& m, const eig::EigenBasis& basis);

}  // namespace feen::sim
