#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "feen/mesh.hpp"

namespace feen::vtk {

// Legacy-ASCII unstructured-grid export of nodal scalar fields, one SCALARS
// block per (name, values) pair.  2D nodes are written with z = 0.  Values
// print with 17 significant digits, so files are deterministic and exact.
void write_fields(const std::string& path, const mesh::Mesh& m,
                  const std::vector<std::pair<std::string, Eigen::VectorXd>>& fields);

}  // namespace feen::vtk
