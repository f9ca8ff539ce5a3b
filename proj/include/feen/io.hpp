#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "feen/eig.hpp"
#include "feen/learn.hpp"
#include "feen/mesh.hpp"
#include "feen/sim.hpp"

// Typed artifacts on top of the binary container.  Every file carries a
// "kind" tag and the content hashes that tie the pipeline together; loaders
// verify the tag, re-derive what is derivable (boundary sets, dof maps), and
// re-hash stored payloads so corruption or hand-edits surface as
// HashMismatch instead of downstream garbage.

namespace feen::io {

// The geometry label ("square", "fins", a file stem) travels with the mesh
// so downstream reports can name what they were computed on.
void save_mesh(const std::string& path, const mesh::Mesh& m,
               const std::string& geometry = "custom");
mesh::Mesh load_mesh(const std::string& path);
std::string mesh_geometry(const std::string& path);

void save_basis(const std::string& path, const eig::EigenBasis& basis);
eig::EigenBasis load_basis(const std::string& path);

void save_dataset(const std::string& path, const sim::Dataset& data);
sim::Dataset load_dataset(const std::string& path);

void save_model(const std::string& path, const learn::BranchModel& model);
learn::BranchModel load_model(const std::string& path);

// Nodal scalar field bound to the mesh it lives on.
struct Field {
  Eigen::VectorXd values;
  std::uint64_t mesh_id = 0;
};

void save_field(const std::string& path, const Eigen::VectorXd& values, std::uint64_t mesh_id);
Field load_field(const std::string& path);

// Peek at a file's kind tag ("mesh", "basis", "dataset", "model", "field").
std::string kind_of(const std::string& path);

// Cross-artifact binding check; throws HashMismatch naming `what`.
void require_match(std::uint64_t actual, std::uint64_t expected, const std::string& what);

}  // namespace feen::io
