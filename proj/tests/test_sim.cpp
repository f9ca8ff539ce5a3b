#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "feen/container.hpp"
#include "feen/eig.hpp"
#include "feen/errors.hpp"
#include "feen/grf.hpp"
#include "feen/mesh.hpp"
#include "feen/sim.hpp"

using namespace feen;
using sim::Problem;
using sim::ProblemSpec;

namespace {

double mnorm(const fem::SparseMatrix& m, const Eigen::VectorXd& v) {
  return std::sqrt(v.dot(m.multiply(v)));
}

ProblemSpec heat_spec(Problem p, std::vector<double> times) {
  ProblemSpec spec;
  spec.problem = p;
  spec.snapshot_times = std::move(times);
  return spec;
}

}  // namespace

TEST_CASE("problem names round trip") {
  for (auto p : {Problem::poisson, Problem::heat_homogeneous, Problem::heat_forced})
    CHECK(sim::problem_from_name(sim::problem_name(p)) == p);
  CHECK_THROWS_AS(sim::problem_from_name("advection"), DomainError);
  CHECK(!sim::is_heat(Problem::poisson));
  CHECK(sim::is_heat(Problem::heat_forced));
}

TEST_CASE("spec validation catches inconsistent time data") {
  ProblemSpec ok = heat_spec(Problem::heat_homogeneous, sim::default_snapshot_times(1.0));
  CHECK_NOTHROW(sim::validate(ok));
  CHECK(ok.snapshot_times.size() == 10);
  CHECK(ok.snapshot_times.front() == doctest::Approx(0.1));
  CHECK(ok.snapshot_times.back() == doctest::Approx(1.0));

  ProblemSpec bad = ok;
  bad.snapshot_times.clear();
  CHECK_THROWS_AS(sim::validate(bad), MissingTime);

  bad = ok;
  bad.snapshot_times = {0.1001};  // not on the step grid
  CHECK_THROWS_AS(sim::validate(bad), DomainError);

  bad = ok;
  bad.snapshot_times = {1.5};
  CHECK_THROWS_AS(sim::validate(bad), DomainError);

  bad = ok;
  bad.dt = -0.1;
  CHECK_THROWS_AS(sim::validate(bad), DomainError);

  bad = ok;
  bad.diffusivity = 0.0;
  CHECK_THROWS_AS(sim::validate(bad), DomainError);

  // poisson ignores the time machinery entirely
  ProblemSpec stat;
  stat.problem = Problem::poisson;
  stat.dt = -1.0;
  CHECK_NOTHROW(sim::validate(stat));
}

TEST_CASE("weak poisson solve converges at second order against sin sin") {
  auto mms_error = [](int cells) {
    mesh::Mesh mesh = mesh::generate_unit_square(cells + 1);
    fem::FemSystem sys = fem::assemble_system(mesh);
    const int n = mesh.num_nodes();
    Eigen::VectorXd u_exact(n), f(n);
    for (int i = 0; i < n; ++i) {
      const double x = mesh.nodes(i, 0), y = mesh.nodes(i, 1);
      u_exact[i] = std::sin(M_PI * x) * std::sin(M_PI * y);
      f[i] = 2.0 * M_PI * M_PI * u_exact[i];
    }
    const Eigen::VectorXd u_h = sim::solve_poisson(sys, f, 1e-12);
    for (int b : mesh.boundary_nodes) CHECK(u_h[b] == 0.0);
    return mnorm(sys.mass, u_h - u_exact) / mnorm(sys.mass, u_exact);
  };

  const double e8 = mms_error(8), e16 = mms_error(16), e32 = mms_error(32);
  CHECK(e8 / e16 > 3.4);
  CHECK(e8 / e16 < 4.6);
  CHECK(e16 / e32 > 3.4);
  CHECK(e16 / e32 < 4.6);
  CHECK(e32 < 3e-3);
}

TEST_CASE("cutoff field matches the unit-forcing Fourier series at the center") {
  mesh::Mesh mesh = mesh::generate_unit_square(33);
  fem::FemSystem sys = fem::assemble_system(mesh);
  const Eigen::VectorXd w =
      sim::solve_poisson(sys, Eigen::VectorXd::Ones(mesh.num_nodes()), 1e-12);

  // -lap u = 1 on the unit square: u(1/2,1/2) as an odd double sine series.
  double series = 0.0;
  for (int m = 1; m <= 601; m += 2)
    for (int n = 1; n <= 601; n += 2) {
      const double sign = (((m + n - 2) / 2) % 2 == 0) ? 1.0 : -1.0;
      series += 16.0 * sign /
                (std::pow(M_PI, 4) * m * n * (static_cast<double>(m) * m + static_cast<double>(n) * n));
    }

  const int center = 16 * 33 + 16;
  REQUIRE(mesh.nodes(center, 0) == doctest::Approx(0.5));
  REQUIRE(mesh.nodes(center, 1) == doctest::Approx(0.5));
  CHECK(std::abs(w[center] - series) / series < 1e-2);

  const Eigen::VectorXd d = sim::compute_cutoff_field(sys);
  CHECK(d.maxCoeff() == 1.0);
  CHECK(d[center] == 1.0);  // peak sits at the center by symmetry
  CHECK(d.minCoeff() >= 0.0);
  for (int b : mesh.boundary_nodes) CHECK(d[b] == 0.0);

  const Eigen::VectorXd raw = Eigen::VectorXd::Constant(mesh.num_nodes(), 2.5);
  const Eigen::VectorXd u0 = sim::make_admissible_ic(raw, d);
  CHECK(u0[center] == 2.5);
  for (int b : mesh.boundary_nodes) CHECK(u0[b] == 0.0);
  CHECK_THROWS_AS(sim::make_admissible_ic(Eigen::VectorXd::Ones(3), d), ShapeMismatch);
}

TEST_CASE("one implicit Euler step damps eigenmodes by 1/(1 + dt D lambda)") {
  mesh::Mesh mesh = mesh::generate_unit_square(9);
  fem::FemSystem sys = fem::assemble_system(mesh);
  eig::EigenBasis basis = eig::build_eigenbasis(mesh, 3, 1e-11);

  const double D = 0.02, dt = 0.0025;
  sim::HeatStepper stepper(sys, D, dt);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.num_nodes());

  // single mode
  const Eigen::VectorXd phi1 = fem::extend_vector(basis.modes.col(0), sys.dofs);
  const Eigen::VectorXd u1 = stepper.step(phi1, zero);
  const Eigen::VectorXd want1 = phi1 / (1.0 + dt * D * basis.eigenvalues(0));
  CHECK((u1 - want1).norm() <= 1e-12 * want1.norm());

  // superposition damps mode by mode
  const Eigen::VectorXd mix = 2.0 * phi1 - 3.0 * fem::extend_vector(basis.modes.col(2), sys.dofs);
  const Eigen::VectorXd u2 = stepper.step(mix, zero);
  const Eigen::VectorXd want2 =
      2.0 * phi1 / (1.0 + dt * D * basis.eigenvalues(0)) -
      3.0 * fem::extend_vector(basis.modes.col(2), sys.dofs) / (1.0 + dt * D * basis.eigenvalues(2));
  CHECK((u2 - want2).norm() <= 1e-12 * want2.norm());

  CHECK_THROWS_AS(stepper.step(Eigen::VectorXd::Ones(5), zero), ShapeMismatch);
  CHECK_THROWS_AS(sim::HeatStepper(sys, -1.0, dt), DomainError);
  CHECK_THROWS_AS(sim::HeatStepper(sys, D, 0.0), DomainError);
}

TEST_CASE("trajectory snapshots equal repeated single steps and the mode power law") {
  mesh::Mesh mesh = mesh::generate_unit_square(9);
  fem::FemSystem sys = fem::assemble_system(mesh);
  eig::EigenBasis basis = eig::build_eigenbasis(mesh, 1, 1e-11);

  const double D = 0.02, dt = 0.0025;
  sim::HeatStepper stepper(sys, D, dt);
  const Eigen::VectorXd phi1 = fem::extend_vector(basis.modes.col(0), sys.dofs);

  grf::GrfSpec gspec;
  gspec.seed = 5;
  const Eigen::VectorXd f = grf::sample_field(gspec, 0, mesh.nodes);

  const std::vector<double> times = {0.25, 0.5, 1.0};
  const Eigen::MatrixXd snaps = stepper.run(phi1, f, 1.0, times);
  REQUIRE(snaps.rows() == 3);
  REQUIRE(snaps.cols() == mesh.num_nodes());

  Eigen::VectorXd u = phi1;
  for (int s = 1; s <= 400; ++s) {
    u = stepper.step(u, f);
    if (s == 100) CHECK((snaps.row(0).transpose() - u).norm() <= 1e-13 * u.norm());
    if (s == 200) CHECK((snaps.row(1).transpose() - u).norm() <= 1e-13 * u.norm());
  }
  CHECK((snaps.row(2).transpose() - u).norm() <= 1e-13 * u.norm());

  // zero forcing trajectory obeys the exact discrete power law over 400 steps
  const Eigen::MatrixXd pure =
      stepper.run(phi1, Eigen::VectorXd::Zero(mesh.num_nodes()), 1.0, {1.0});
  const double gain = std::pow(1.0 + dt * D * basis.eigenvalues(0), -400.0);
  CHECK((pure.row(0).transpose() - gain * phi1).norm() <= 1e-9 * gain * phi1.norm());

  CHECK_THROWS_AS(stepper.run(phi1, f, 1.0, {0.1001}), DomainError);
  CHECK_THROWS_AS(stepper.run(phi1, f, 1.0, {1.25}), DomainError);

  // convenience wrapper agrees with the stepper
  ProblemSpec spec = heat_spec(Problem::heat_homogeneous, {1.0});
  const Eigen::VectorXd via_mesh = sim::step_heat(mesh, spec, phi1, f);
  CHECK((via_mesh - stepper.step(phi1, f)).norm() <= 1e-13 * via_mesh.norm());
}

TEST_CASE("implicit Euler converges at first order to the modal exact solution") {
  // Full spectrum on a coarse mesh, so every field is exactly representable
  // and the semidiscrete solution has a closed form:
  //   c_k(T) = c_k(0) exp(-D lam T) + f_k/(D lam) (1 - exp(-D lam T)).
  mesh::Mesh mesh = mesh::generate_unit_square(5);
  fem::FemSystem sys = fem::assemble_system(mesh);
  const int ni = sys.dofs.n_interior();
  eig::EigenBasis basis = eig::build_eigenbasis(mesh, ni, 1e-11);

  const Eigen::VectorXd u0 = sim::compute_cutoff_field(sys);
  grf::GrfSpec gspec;
  gspec.seed = 1;
  const Eigen::VectorXd f = grf::sample_field(gspec, 0, mesh.nodes);

  const double D = 0.02, T = 1.0;
  const Eigen::VectorXd c0 =
      basis.modes.transpose() * fem::restrict_vector(sys.mass.multiply(u0), sys.dofs);
  const Eigen::VectorXd fk =
      basis.modes.transpose() * fem::restrict_vector(sys.mass.multiply(f), sys.dofs);
  Eigen::VectorXd c_exact(ni);
  for (int k = 0; k < ni; ++k) {
    const double lam = basis.eigenvalues(k);
    const double decay = std::exp(-D * lam * T);
    c_exact[k] = c0[k] * decay + fk[k] / (D * lam) * (1.0 - decay);
  }
  const Eigen::VectorXd u_exact = fem::extend_vector(basis.modes * c_exact, sys.dofs);
  const double ref = mnorm(sys.mass, u_exact);

  std::vector<double> errs;
  for (double dt : {0.05, 0.025, 0.0125}) {
    sim::HeatStepper st(sys, D, dt);
    Eigen::VectorXd u = u0;
    const long nsteps = std::lround(T / dt);
    for (long s = 0; s < nsteps; ++s) u = st.step(u, f);
    errs.push_back(mnorm(sys.mass, u - u_exact) / ref);
  }
  CHECK(errs[0] / errs[1] > 1.85);
  CHECK(errs[0] / errs[1] < 2.1);
  CHECK(errs[1] / errs[2] > 1.85);
  CHECK(errs[1] / errs[2] < 2.1);
}

TEST_CASE("admissible initial data stays within its initial bounds") {
  // Smooth nonnegative data from the sampling pipeline: the trajectory never
  // undershoots zero or overshoots the initial maximum.  This is a property
  // of the data regime (field length scale well above h), not of arbitrary
  // nodal data.
  mesh::Mesh mesh = mesh::generate_unit_square(17);
  fem::FemSystem sys = fem::assemble_system(mesh);
  const Eigen::VectorXd d = sim::compute_cutoff_field(sys);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mesh.num_nodes());
  sim::HeatStepper stepper(sys, 0.02, 0.0025);

  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    grf::GrfSpec gspec;
    gspec.seed = seed;
    const Eigen::VectorXd raw = grf::sample_field(gspec, 0, mesh.nodes);
    Eigen::VectorXd u = sim::make_admissible_ic(raw.cwiseAbs(), d);
    const double u0max = u.maxCoeff();
    double gmin = 0.0, gmax = u0max;
    for (int s = 0; s < 400; ++s) {
      u = stepper.step(u, zero);
      gmin = std::min(gmin, u.minCoeff());
      gmax = std::max(gmax, u.maxCoeff());
    }
    CHECK(gmin >= -1e-12 * u0max);
    CHECK(gmax <= u0max * (1.0 + 1e-12));
  }
}

TEST_CASE("poisson dataset rows solve the weak problem for their own forcing") {
  mesh::Mesh mesh = mesh::generate_unit_square(9);
  ProblemSpec spec;
  spec.problem = Problem::poisson;
  grf::GrfSpec gspec;
  gspec.seed = 77;

  sim::Dataset data = sim::build_dataset(mesh, spec, gspec, 4);
  CHECK(data.problem == Problem::poisson);
  CHECK(data.n_samples() == 4);
  CHECK(data.n_nodes() == mesh.num_nodes());
  CHECK(data.n_snapshots() == 1);
  CHECK(data.mesh_id == container::mesh_hash(mesh));

  fem::FemSystem sys = fem::assemble_system(mesh);
  for (int s = 0; s < 4; ++s) {
    // forcing reproducible straight from the field sampler
    const Eigen::VectorXd f =
        grf::sample_field(gspec, static_cast<std::uint64_t>(s), mesh.nodes);
    CHECK(data.inputs_f.row(s).transpose() == f);
    CHECK(data.branch_input(s) == f);

    // outputs cross-checked against the iterative solver
    const Eigen::VectorXd u = sim::solve_poisson(sys, f, 1e-12);
    const Eigen::VectorXd got = data.output_at(s, 0);
    CHECK((got - u).norm() <= 1e-8 * u.norm());
  }
  CHECK_THROWS_AS(data.output_at(0, 1), ShapeMismatch);
  CHECK_THROWS_AS(data.output_at(9, 0), ShapeMismatch);

  // bit identical on rebuild
  sim::Dataset again = sim::build_dataset(mesh, spec, gspec, 4);
  CHECK(again.outputs == data.outputs);
  CHECK(again.inputs_f == data.inputs_f);
}

TEST_CASE("heat datasets carry admissible initial data and stepper trajectories") {
  mesh::Mesh mesh = mesh::generate_unit_square(9);
  ProblemSpec spec = heat_spec(Problem::heat_forced, {0.5, 1.0});
  grf::GrfSpec gspec;
  gspec.seed = 13;

  sim::Dataset data = sim::build_dataset(mesh, spec, gspec, 3);
  CHECK(data.n_samples() == 3);
  CHECK(data.n_snapshots() == 2);
  CHECK(data.n_nodes() == mesh.num_nodes());
  CHECK(data.outputs.cols() == 2 * mesh.num_nodes());
  CHECK(data.diffusivity == spec.diffusivity);

  fem::FemSystem sys = fem::assemble_system(mesh);
  const Eigen::VectorXd cutoff = sim::compute_cutoff_field(sys);
  sim::HeatStepper stepper(sys, spec.diffusivity, spec.dt);

  for (int s = 0; s < 3; ++s) {
    const Eigen::VectorXd raw =
        grf::sample_field(gspec, static_cast<std::uint64_t>(s), mesh.nodes, 0);
    const Eigen::VectorXd f =
        grf::sample_field(gspec, static_cast<std::uint64_t>(s), mesh.nodes, 1);
    CHECK(data.inputs_u0.row(s).transpose() == raw.cwiseProduct(cutoff));
    CHECK(data.inputs_f.row(s).transpose() == f);
    CHECK(data.branch_input(s) == data.inputs_u0.row(s).transpose());
    CHECK(f != raw);  // forcing stream is independent of the initial data stream

    // replay through the public single-step interface
    Eigen::VectorXd u = data.inputs_u0.row(s).transpose();
    for (int k = 1; k <= 400; ++k) {
      u = stepper.step(u, f);
      if (k == 200) CHECK((data.output_at(s, 0) - u).norm() <= 1e-12 * u.norm());
    }
    CHECK((data.output_at(s, 1) - u).norm() <= 1e-12 * u.norm());
  }

  // homogeneous variant has no forcing inputs
  sim::Dataset homo =
      sim::build_dataset(mesh, heat_spec(Problem::heat_homogeneous, {1.0}), gspec, 2);
  CHECK(homo.inputs_f.rows() == 0);
  CHECK(homo.inputs_u0.rows() == 2);

  CHECK_THROWS_AS(sim::build_dataset(mesh, spec, gspec, 0), DomainError);
  ProblemSpec broken = spec;
  broken.snapshot_times = {0.1234};
  CHECK_THROWS_AS(sim::build_dataset(mesh, broken, gspec, 1), DomainError);
}

TEST_CASE("forcing coefficients are the mass projections on the basis") {
  mesh::Mesh mesh = mesh::generate_unit_square(9);
  ProblemSpec spec = heat_spec(Problem::heat_forced, {1.0});
  grf::GrfSpec gspec;
  gspec.seed = 21;
  sim::Dataset data = sim::build_dataset(mesh, spec, gspec, 2);

  eig::EigenBasis basis = eig::build_eigenbasis(mesh, 4, 1e-10);
  sim::attach_forcing_coeffs(data, mesh, basis);
  REQUIRE(data.f_coeffs.rows() == 2);
  REQUIRE(data.f_coeffs.cols() == 4);
  CHECK(data.f_basis_hash != 0);

  const fem::SparseMatrix mass = fem::assemble_mass(mesh);
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd mf =
        fem::restrict_vector(mass.multiply(data.inputs_f.row(s).transpose()), basis.dofs);
    const Eigen::VectorXd want = basis.modes.transpose() * mf;
    CHECK((data.f_coeffs.row(s).transpose() - want).norm() <= 1e-13 * want.norm());
  }

  eig::EigenBasis wrong = basis;
  wrong.mesh_id ^= 1;
  CHECK_THROWS_AS(sim::attach_forcing_coeffs(data, mesh, wrong), HashMismatch);

  sim::Dataset homo =
      sim::build_dataset(mesh, heat_spec(Problem::heat_homogeneous, {1.0}), gspec, 1);
  CHECK_THROWS_AS(sim::attach_forcing_coeffs(homo, mesh, basis), ShapeMismatch);
}
