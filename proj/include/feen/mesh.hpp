#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace feen::mesh {

// Simplicial conforming mesh: triangles (dim 2) or tetrahedra (dim 3).
// Elements are stored with positive signed volume; boundary nodes are the
// vertices of facets that belong to exactly one element.
struct Mesh {
  int dim = 2;
  Eigen::MatrixXd nodes;     // n_nodes x dim
  Eigen::MatrixXi elements;  // n_elements x (dim + 1)
  std::vector<int> boundary_nodes;        // sorted ascending
  std::vector<std::uint8_t> on_boundary;  // size n_nodes

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_elements() const { return static_cast<int>(elements.rows()); }
  int verts_per_element() const { return dim + 1; }
  bool is_boundary(int v) const { return on_boundary[static_cast<size_t>(v)] != 0; }
  int num_interior() const { return num_nodes() - static_cast<int>(boundary_nodes.size()); }
};

struct FinsParams {
  double base_width = 2.0;
  double base_height = 1.0;
  int fin_count = 4;
  double fin_width = 0.1;
  double fin_length = 0.5;
};

struct GeometrySpec {
  enum class Kind { unit_square, fins, external_file };
  Kind kind = Kind::unit_square;
  double resolution = 1.0 / 34.0;  // target edge length for generated meshes
  FinsParams fins;
  std::string path;  // external_file only
};

double element_volume(const Mesh& m, int e);
double domain_volume(const Mesh& m);

// Reorders element vertices in place so every signed volume is positive.
void orient_elements(Mesh& m);

// Rebuilds boundary_nodes / on_boundary from element connectivity alone.
void detect_boundary(Mesh& m);

// Structured triangulation of [0,1]^2 with n_per_side nodes per side and the
// lower-left to upper-right diagonal in each cell.
Mesh generate_unit_square(int n_per_side);

// Rectangular base with fin_count rectangular fins on its top edge, evenly
// spaced with equal end gaps, meshed on a snapped lattice so every material
// boundary coincides with grid lines.
Mesh generate_fins(const FinsParams& p, double resolution);

// Gmsh MSH 4.1 ASCII subset: linear triangles or tetrahedra; points and
// lines are ignored, everything else is rejected.
Mesh read_msh(const std::string& path);

Mesh generate(const GeometrySpec& spec);

inline constexpr double kTolBarycentric = 1e-10;

// Element lookup accelerated by a uniform bin grid over the mesh bounding
// box.  Points within kTolBarycentric outside an element still resolve.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& m);

  struct Hit {
    int element;
    Eigen::VectorXd bary;  // dim + 1 entries, >= -kTolBarycentric, sum 1
  };

  Hit locate(const Eigen::VectorXd& x) const;  // throws NotInDomain
  std::optional<Hit> try_locate(const Eigen::VectorXd& x) const;

 private:
  const Mesh& mesh_;
  Eigen::VectorXd lo_, hi_;
  Eigen::VectorXi nbins_;
  std::vector<std::vector<int>> bins_;
  // Per element: anchor vertex and inverse edge matrix for barycentric solve.
  std::vector<Eigen::Matrix3d> inv_edges_;
  std::vector<Eigen::Vector3d> anchors_;

  int bin_index(const Eigen::VectorXi& cell) const;
  Eigen::VectorXd barycentric(int e, const Eigen::VectorXd& x) const;
};

// P1 interpolation of nodal fields (columns) at query points (rows).
Eigen::MatrixXd interpolate(const Mesh& m, const PointLocator& loc,
                            const Eigen::MatrixXd& nodal,
                            const Eigen::MatrixXd& points);

}  // namespace feen::mesh
