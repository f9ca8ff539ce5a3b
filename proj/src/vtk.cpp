#include "feen/vtk.hpp"

#include <cstdio>
#include <fstream>

#include "feen/errors.hpp"

namespace feen::vtk {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_fields(const std::string& path, const mesh::Mesh& m,
                  const std::vector<std::pair<std::string, Eigen::VectorXd>>& fields) {
  for (const auto& [name, values] : fields)
    if (values.size() != m.num_nodes())
      throw ShapeMismatch("field \"" + name + "\" does not match the mesh node count");

  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) throw IoError("cannot open " + path + " for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "feen field export\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << m.num_nodes() << " double\n";
  for (int i = 0; i < m.num_nodes(); ++i) {
    out << fmt(m.nodes(i, 0)) << ' ' << fmt(m.nodes(i, 1)) << ' '
        << (m.dim == 3 ? fmt(m.nodes(i, 2)) : "0") << '\n';
  }

  const int k = m.verts_per_element();
  out << "CELLS " << m.num_elements() << ' ' << m.num_elements() * (k + 1) << '\n';
  for (int e = 0; e < m.num_elements(); ++e) {
    out << k;
    for (int v = 0; v < k; ++v) out << ' ' << m.elements(e, v);
    out << '\n';
  }

  out << "CELL_TYPES " << m.num_elements() << '\n';
  const int cell_type = m.dim == 3 ? 10 : 5;  // VTK_TETRA / VTK_TRIANGLE
  for (int e = 0; e < m.num_elements(); ++e) out << cell_type << '\n';

  if (!fields.empty()) {
    out << "POINT_DATA " << m.num_nodes() << '\n';
    for (const auto& [name, values] : fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (long i = 0; i < values.size(); ++i) out << fmt(values(i)) << '\n';
    }
  }

  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace feen::vtk
