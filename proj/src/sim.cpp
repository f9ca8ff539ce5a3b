#include "feen/sim.hpp"

#include <cmath>

#include "feen/container.hpp"
#include "feen/errors.hpp"

namespace feen::sim {

std::string problem_name(Problem p) {
  switch (p) {
    case Problem::poisson: return "poisson";
    case Problem::heat_homogeneous: return "heat_homogeneous";
    case Problem::heat_forced: return "heat_forced";
  }
  throw DomainError("unknown problem");
}

Problem problem_from_name(const std::string& name) {
  if (name == "poisson") return Problem::poisson;
  if (name == "heat_homogeneous") return Problem::heat_homogeneous;
  if (name == "heat_forced") return Problem::heat_forced;
  throw DomainError("unknown problem '" + name + "'");
}

bool is_heat(Problem p) { return p != Problem::poisson; }

std::vector<double> default_snapshot_times(double t_final) {
  std::vector<double> t;
  for (int i = 1; i <= 10; ++i) t.push_back(t_final * i / 10.0);
  return t;
}

void validate(const ProblemSpec& spec) {
  if (!is_heat(spec.problem)) return;
  if (!(spec.diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
  if (!(spec.dt > 0.0)) throw DomainError("time step must be positive");
  if (!(spec.t_final >= spec.dt)) throw DomainError("final time must cover at least one step");
  if (spec.snapshot_times.empty()) throw MissingTime("heat problems need snapshot times");
  for (double t : spec.snapshot_times) {
    if (!(t > 0.0) || t > spec.t_final + 1e-12)
      throw DomainError("snapshot time " + std::to_string(t) + " outside (0, t_final]");
    const double steps = t / spec.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      throw DomainError("snapshot time " + std::to_string(t) + " is not a multiple of dt");
  }
}

Eigen::VectorXd solve_poisson(const fem::FemSystem& sys, const Eigen::VectorXd& f_nodal,
                              double tol) {
  if (f_nodal.size() != sys.dofs.n_nodes()) throw ShapeMismatch("forcing size mismatch");
  if (sys.dofs.n_interior() == 0) throw InsufficientDofs("no interior degrees of freedom");
  const fem::SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
  const Eigen::VectorXd rhs = fem::restrict_vector(sys.mass.multiply(f_nodal), sys.dofs);
  return fem::extend_vector(fem::pcg_solve(k_int, rhs, tol), sys.dofs);
}

Eigen::VectorXd solve_poisson(const mesh::Mesh& m, const Eigen::VectorXd& f_nodal, double tol) {
  return solve_poisson(fem::assemble_system(m), f_nodal, tol);
}

Eigen::VectorXd compute_cutoff_field(const fem::FemSystem& sys) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.dofs.n_nodes());
  Eigen::VectorXd d = solve_poisson(sys, ones);
  const double peak = d.maxCoeff();
  if (!(peak > 0.0)) throw InsufficientDofs("cutoff field has no positive peak");
  return d / peak;
}

Eigen::VectorXd compute_cutoff_field(const mesh::Mesh& m) {
  return compute_cutoff_field(fem::assemble_system(m));
}

Eigen::VectorXd make_admissible_ic(const Eigen::VectorXd& raw_field,
                                   const Eigen::VectorXd& cutoff) {
  if (raw_field.size() != cutoff.size()) throw ShapeMismatch("field/cutoff size mismatch");
  return raw_field.cwiseProduct(cutoff);
}

namespace {

fem::SparseMatrix heat_operator(const fem::FemSystem& sys, double diffusivity, double dt) {
  if (!(diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const fem::SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
  const fem::SparseMatrix m_int = fem::restrict_interior(sys.mass, sys.dofs);
  std::vector<fem::Triplet> t;
  t.reserve(static_cast<size_t>(k_int.nnz() + m_int.nnz()));
  for (int r = 0; r < m_int.n_rows; ++r)
    for (int kk = m_int.row_offsets[static_cast<size_t>(r)]; kk < m_int.row_offsets[static_cast<size_t>(r) + 1]; ++kk)
      t.push_back({r, m_int.col_indices[static_cast<size_t>(kk)], m_int.values[static_cast<size_t>(kk)]});
  for (int r = 0; r < k_int.n_rows; ++r)
    for (int kk = k_int.row_offsets[static_cast<size_t>(r)]; kk < k_int.row_offsets[static_cast<size_t>(r) + 1]; ++kk)
      t.push_back({r, k_int.col_indices[static_cast<size_t>(kk)],
                   dt * diffusivity * k_int.values[static_cast<size_t>(kk)]});
  return fem::SparseMatrix::from_triplets(k_int.n_rows, k_int.n_cols, std::move(t));
}

}  // namespace

HeatStepper::HeatStepper(const fem::FemSystem& sys, double diffusivity, double dt)
    : sys_(sys), op_(heat_operator(sys, diffusivity, dt)), dt_(dt) {
  if (!(diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
}

Eigen::VectorXd HeatStepper::step(const Eigen::VectorXd& u_full,
                                  const Eigen::VectorXd& f_full) const {
  if (u_full.size() != sys_.dofs.n_nodes() || f_full.size() != sys_.dofs.n_nodes())
    throw ShapeMismatch("state/forcing size mismatch");
  const Eigen::VectorXd rhs =
      fem::restrict_vector(sys_.mass.multiply(u_full + dt_ * f_full), sys_.dofs);
  return fem::extend_vector(op_.solve(rhs), sys_.dofs);
}

Eigen::MatrixXd HeatStepper::run(const Eigen::VectorXd& u0_full, const Eigen::VectorXd& f_full,
                                 double t_final, const std::vector<double>& snapshot_times) const {
  const long n_steps = std::lround(t_final / dt_);
  std::vector<long> snap_step;
  for (double t : snapshot_times) {
    const long s = std::lround(t / dt_);
    if (std::abs(s * dt_ - t) > 1e-9 || s < 1 || s > n_steps)
      throw DomainError("snapshot time " + std::to_string(t) + " is not reachable");
    snap_step.push_back(s);
  }

  Eigen::MatrixXd snaps(static_cast<int>(snapshot_times.size()), sys_.dofs.n_nodes());
  const Eigen::VectorXd mf_int = fem::restrict_vector(sys_.mass.multiply(f_full), sys_.dofs);
  Eigen::VectorXd u_int = fem::restrict_vector(u0_full, sys_.dofs);
  const fem::SparseMatrix m_int = fem::restrict_interior(sys_.mass, sys_.dofs);

  for (long s = 1; s <= n_steps; ++s) {
    u_int = op_.solve(m_int.multiply(u_int) + dt_ * mf_int);
    for (size_t i = 0; i < snap_step.size(); ++i)
      if (snap_step[i] == s)
        snaps.row(static_cast<int>(i)) = fem::extend_vector(u_int, sys_.dofs).transpose();
  }
  return snaps;
}

Eigen::VectorXd step_heat(const mesh::Mesh& m, const ProblemSpec& spec,
                          const Eigen::VectorXd& u_full, const Eigen::VectorXd& f_full) {
  const fem::FemSystem sys = fem::assemble_system(m);
  return HeatStepper(sys, spec.diffusivity, spec.dt).step(u_full, f_full);
}

int Dataset::n_nodes() const {
  if (problem == Problem::poisson) return static_cast<int>(outputs.cols());
  return static_cast<int>(outputs.cols()) / n_snapshots();
}

Eigen::VectorXd Dataset::output_at(int sample, int snapshot) const {
  if (sample < 0 || sample >= n_samples()) throw ShapeMismatch("sample index out of range");
  if (problem == Problem::poisson) {
    if (snapshot != 0) throw ShapeMismatch("poisson outputs have one snapshot");
    return outputs.row(sample).transpose();
  }
  if (snapshot < 0 || snapshot >= n_snapshots()) throw ShapeMismatch("snapshot index out of range");
  return outputs.row(sample).segment(static_cast<long>(snapshot) * n_nodes(), n_nodes()).transpose();
}

Eigen::VectorXd Dataset::branch_input(int sample) const {
  if (sample < 0 || sample >= n_samples()) throw ShapeMismatch("sample index out of range");
  if (problem == Problem::poisson) return inputs_f.row(sample).transpose();
  return inputs_u0.row(sample).transpose();
}

Dataset build_dataset(const mesh::Mesh& m, const ProblemSpec& spec, const grf::GrfSpec& grf_spec,
                      int n_samples) {
  if (n_samples < 1) throw DomainError("dataset needs at least one sample");
  validate(spec);

  const fem::FemSystem sys = fem::assemble_system(m);
  if (sys.dofs.n_interior() == 0) throw InsufficientDofs("no interior degrees of freedom");
  const int n = m.num_nodes();

  Dataset data;
  data.problem = spec.problem;
  data.grf = grf_spec;
  data.mesh_id = container::mesh_hash(m);

  if (spec.problem == Problem::poisson) {
    const fem::SparseMatrix k_int = fem::restrict_interior(sys.stiffness, sys.dofs);
    const fem::FactorizedSpd k_fac(k_int);
    data.inputs_f.resize(n_samples, n);
    data.outputs.resize(n_samples, n);
    for (int s = 0; s < n_samples; ++s) {
      const Eigen::VectorXd f =
          grf::sample_field(grf_spec, static_cast<std::uint64_t>(s), m.nodes);
      const Eigen::VectorXd rhs = fem::restrict_vector(sys.mass.multiply(f), sys.dofs);
      data.inputs_f.row(s) = f.transpose();
      data.outputs.row(s) = fem::extend_vector(k_fac.solve(rhs), sys.dofs).transpose();
    }
    return data;
  }

  data.snapshot_times = spec.snapshot_times;
  data.diffusivity = spec.diffusivity;
  const int n_snaps = static_cast<int>(spec.snapshot_times.size());
  const Eigen::VectorXd cutoff = compute_cutoff_field(sys);
  const HeatStepper stepper(sys, spec.diffusivity, spec.dt);

  data.inputs_u0.resize(n_samples, n);
  data.outputs.resize(n_samples, static_cast<long>(n_snaps) * n);
  const bool forced = spec.problem == Problem::heat_forced;
  if (forced) data.inputs_f.resize(n_samples, n);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd raw =
        grf::sample_field(grf_spec, static_cast<std::uint64_t>(s), m.nodes, 0);
    const Eigen::VectorXd u0 = make_admissible_ic(raw, cutoff);
    data.inputs_u0.row(s) = u0.transpose();
    Eigen::VectorXd f = zero;
    if (forced) {
      f = grf::sample_field(grf_spec, static_cast<std::uint64_t>(s), m.nodes, 1);
      data.inputs_f.row(s) = f.transpose();
    }
    const Eigen::MatrixXd snaps = stepper.run(u0, f, spec.t_final, spec.snapshot_times);
    for (int j = 0; j < n_snaps; ++j)
      data.outputs.row(s).segment(static_cast<long>(j) * n, n) = snaps.row(j);
  }
  return data;
}

void attach_forcing_coeffs(Dataset& data, const mesh::Mesh& m, const eig::EigenBasis& basis) {
  if (data.inputs_f.rows() == 0) throw ShapeMismatch("dataset has no forcing inputs");
  if (data.mesh_id != basis.mesh_id) throw HashMismatch("dataset and basis meshes differ");
  const fem::SparseMatrix mass = fem::assemble_mass(m);
  data.f_coeffs.resize(data.inputs_f.rows(), basis.m());
  for (int s = 0; s < data.inputs_f.rows(); ++s) {
    const Eigen::VectorXd mf =
        fem::restrict_vector(mass.multiply(data.inputs_f.row(s).transpose()), basis.dofs);
    data.f_coeffs.row(s) = (basis.modes.transpose() * mf).transpose();
  }
  data.f_basis_hash = eig::fingerprint(basis);
}

}  // namespace feen::sim
