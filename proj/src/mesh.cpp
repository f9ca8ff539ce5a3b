#include "feen/mesh.hpp"

#include "feen/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace feen::mesh {

namespace {

Eigen::Matrix2d edge_matrix_2d(const Mesh& m, int e) {
  const auto& el = m.elements;
  Eigen::Matrix2d J;
  J.col(0) = (m.nodes.row(el(e, 1)) - m.nodes.row(el(e, 0))).transpose();
  J.col(1) = (m.nodes.row(el(e, 2)) - m.nodes.row(el(e, 0))).transpose();
  return J;
}

Eigen::Matrix3d edge_matrix_3d(const Mesh& m, int e) {
  const auto& el = m.elements;
  Eigen::Matrix3d J;
  for (int k = 0; k < 3; ++k)
    J.col(k) = (m.nodes.row(el(e, k + 1)) - m.nodes.row(el(e, 0))).transpose();
  return J;
}

double signed_volume(const Mesh& m, int e) {
  if (m.dim == 2) return edge_matrix_2d(m, e).determinant() / 2.0;
  return edge_matrix_3d(m, e).determinant() / 6.0;
}

// Facets packed into one word; node counts beyond 2^21 would alias.
constexpr int kMaxPackedNodes = 1 << 21;

std::uint64_t pack_facet(std::array<int, 3> f) {
  std::sort(f.begin(), f.end());
  return (static_cast<std::uint64_t>(f[0]) << 42) |
         (static_cast<std::uint64_t>(f[1]) << 21) |
         static_cast<std::uint64_t>(f[2]);
}

}  // namespace

double element_volume(const Mesh& m, int e) { return signed_volume(m, e); }

double domain_volume(const Mesh& m) {
  double v = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) v += signed_volume(m, e);
  return v;
}

void orient_elements(Mesh& m) {
  const int last = m.verts_per_element() - 1;
  for (int e = 0; e < m.num_elements(); ++e) {
    if (signed_volume(m, e) < 0.0) std::swap(m.elements(e, last - 1), m.elements(e, last));
  }
}

void detect_boundary(Mesh& m) {
  if (m.num_nodes() >= kMaxPackedNodes)
    throw InvalidGeometry("mesh exceeds supported node count");

  // Count facet occurrences; a facet seen once lies on the boundary.
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(static_cast<size_t>(m.num_elements()) * (m.dim + 1));
  auto facets_of = [&](int e) {
    std::vector<std::array<int, 3>> fs;
    const auto& el = m.elements;
    if (m.dim == 2) {
      // Edges; the smaller endpoint is duplicated so the packed key stays
      // three ints wide and independent of edge direction.
      auto edge = [&](int u, int v) -> std::array<int, 3> {
        return {std::min(u, v), std::min(u, v), std::max(u, v)};
      };
      fs = {edge(el(e, 0), el(e, 1)), edge(el(e, 1), el(e, 2)), edge(el(e, 2), el(e, 0))};
    } else {
      fs = {{el(e, 0), el(e, 1), el(e, 2)},
            {el(e, 0), el(e, 1), el(e, 3)},
            {el(e, 0), el(e, 2), el(e, 3)},
            {el(e, 1), el(e, 2), el(e, 3)}};
    }
    return fs;
  };

  for (int e = 0; e < m.num_elements(); ++e)
    for (const auto& f : facets_of(e)) ++count[pack_facet(f)];

  m.on_boundary.assign(static_cast<size_t>(m.num_nodes()), 0);
  for (int e = 0; e < m.num_elements(); ++e) {
    for (const auto& f : facets_of(e)) {
      if (count[pack_facet(f)] == 1) {
        m.on_boundary[static_cast<size_t>(f[0])] = 1;
        m.on_boundary[static_cast<size_t>(f[1])] = 1;
        m.on_boundary[static_cast<size_t>(f[2])] = 1;
      }
    }
  }
  m.boundary_nodes.clear();
  for (int v = 0; v < m.num_nodes(); ++v)
    if (m.on_boundary[static_cast<size_t>(v)]) m.boundary_nodes.push_back(v);
}

Mesh generate_unit_square(int n_per_side) {
  if (n_per_side < 2) throw InvalidGeometry("unit square needs at least 2 nodes per side");
  const int n = n_per_side;
  const double h = 1.0 / (n - 1);

  Mesh m;
  m.dim = 2;
  m.nodes.resize(n * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.nodes.row(i * n + j) << j * h, i * h;

  m.elements.resize(2 * (n - 1) * (n - 1), 3);
  int t = 0;
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < n - 1; ++j) {
      const int a = i * n + j, b = i * n + j + 1;
      const int c = (i + 1) * n + j + 1, d = (i + 1) * n + j;
      m.elements.row(t++) << a, b, c;  // diagonal a-c
      m.elements.row(t++) << a, c, d;
    }
  }
  detect_boundary(m);
  return m;
}

namespace {

// Breakpoints subdivided to roughly `h` spacing, keeping every breakpoint.
std::vector<double> snapped_axis(const std::vector<double>& breaks, double h) {
  std::vector<double> b = breaks;
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(),
                      [](double a, double c) { return std::abs(a - c) < 1e-12; }),
          b.end());
  std::vector<double> grid;
  grid.push_back(b.front());
  for (size_t i = 0; i + 1 < b.size(); ++i) {
    const double len = b[i + 1] - b[i];
    const int k = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    for (int j = 1; j <= k; ++j) grid.push_back(b[i] + len * j / k);
  }
  return grid;
}

}  // namespace

Mesh generate_fins(const FinsParams& p, double resolution) {
  if (p.base_width <= 0.0 || p.base_height <= 0.0)
    throw InvalidGeometry("fins base must have positive extent");
  if (resolution <= 0.0) throw InvalidGeometry("resolution must be positive");
  if (p.fin_count < 0) throw InvalidGeometry("fin count must be non-negative");
  const bool has_fins = p.fin_count > 0 && p.fin_length > 0.0;
  if (p.fin_count > 0 && p.fin_width <= 0.0)
    throw InvalidGeometry("fin width must be positive");
  if (p.fin_count > 0 && p.fin_length < 0.0)
    throw InvalidGeometry("fin length must be non-negative");
  if (p.fin_count > 0 && p.fin_count * p.fin_width >= p.base_width)
    throw InvalidGeometry("fins do not fit on the base");

  const double W = p.base_width, H = p.base_height;
  std::vector<double> xb = {0.0, W};
  std::vector<std::pair<double, double>> fins;
  if (has_fins) {
    const double gap = (W - p.fin_count * p.fin_width) / (p.fin_count + 1);
    for (int i = 0; i < p.fin_count; ++i) {
      const double x0 = gap * (i + 1) + p.fin_width * i;
      fins.emplace_back(x0, x0 + p.fin_width);
      xb.push_back(x0);
      xb.push_back(x0 + p.fin_width);
    }
  }
  std::vector<double> yb = {0.0, H};
  if (has_fins) yb.push_back(H + p.fin_length);

  const std::vector<double> xs = snapped_axis(xb, resolution);
  const std::vector<double> ys = snapped_axis(yb, resolution);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());

  auto cell_inside = [&](int i, int j) {
    const double cx = 0.5 * (xs[j] + xs[j + 1]);
    const double cy = 0.5 * (ys[i] + ys[i + 1]);
    if (cy < H) return true;
    for (const auto& [x0, x1] : fins)
      if (cx > x0 && cx < x1) return true;
    return false;
  };

  std::vector<int> node_id(static_cast<size_t>(nx) * ny, -1);
  auto lattice = [&](int i, int j) -> int& { return node_id[static_cast<size_t>(i) * nx + j]; };

  int n_nodes = 0;
  std::vector<std::array<int, 3>> tris;
  for (int i = 0; i + 1 < ny; ++i) {
    for (int j = 0; j + 1 < nx; ++j) {
      if (!cell_inside(i, j)) continue;
      for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj)
          if (lattice(i + di, j + dj) < 0) lattice(i + di, j + dj) = n_nodes++;
      const int a = lattice(i, j), b = lattice(i, j + 1);
      const int c = lattice(i + 1, j + 1), d = lattice(i + 1, j);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  if (tris.empty()) throw InvalidGeometry("fins geometry produced no cells");

  Mesh m;
  m.dim = 2;
  m.nodes.resize(n_nodes, 2);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j)
      if (lattice(i, j) >= 0) m.nodes.row(lattice(i, j)) << xs[j], ys[i];
  m.elements.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t)
    m.elements.row(static_cast<int>(t)) << tris[t][0], tris[t][1], tris[t][2];
  detect_boundary(m);
  return m;
}

namespace {

struct LineReader {
  std::ifstream in;
  int line_no = 0;
  explicit LineReader(const std::string& path) : in(path) {}
  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r\n") != std::string::npos) {
        while (!out.empty() && (out.back() == '\r' || out.back() == '\n')) out.pop_back();
        return true;
      }
    }
    return false;
  }
  std::string expect(const char* what) {
    std::string s;
    if (!next(s)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_no);
    return s;
  }
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

long to_long(const std::string& s, const LineReader& r) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected integer, got '" + s + "'", r.line_no);
  }
}

double to_double(const std::string& s, const LineReader& r) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected number, got '" + s + "'", r.line_no);
  }
}

}  // namespace

Mesh read_msh(const std::string& path) {
  LineReader r(path);
  if (!r.in) throw IoError("cannot open mesh file: " + path);

  std::vector<long> node_tags;
  std::vector<std::array<double, 3>> coords;
  std::vector<std::vector<long>> tris, tets;

  std::string line;
  bool saw_format = false;
  while (r.next(line)) {
    if (line == "$MeshFormat") {
      auto toks = split_ws(r.expect("format line"));
      if (toks.size() < 3) throw ParseError("malformed $MeshFormat", r.line_no);
      if (toks[0] != "4.1") throw ParseError("unsupported MSH version " + toks[0], r.line_no);
      if (toks[1] != "0") throw ParseError("binary MSH files are not supported", r.line_no);
      if (r.expect("$EndMeshFormat") != "$EndMeshFormat")
        throw ParseError("missing $EndMeshFormat", r.line_no);
      saw_format = true;
    } else if (line == "$Nodes") {
      auto hdr = split_ws(r.expect("nodes header"));
      if (hdr.size() != 4) throw ParseError("malformed $Nodes header", r.line_no);
      const long n_blocks = to_long(hdr[0], r);
      for (long b = 0; b < n_blocks; ++b) {
        auto bh = split_ws(r.expect("node block header"));
        if (bh.size() != 4) throw ParseError("malformed node block header", r.line_no);
        const long parametric = to_long(bh[2], r);
        if (parametric != 0) throw ParseError("parametric nodes are not supported", r.line_no);
        const long n = to_long(bh[3], r);
        const size_t base = node_tags.size();
        for (long i = 0; i < n; ++i) node_tags.push_back(to_long(split_ws(r.expect("node tag"))[0], r));
        for (long i = 0; i < n; ++i) {
          auto ct = split_ws(r.expect("node coordinates"));
          if (ct.size() < 3) throw ParseError("node needs x y z coordinates", r.line_no);
          coords.push_back({to_double(ct[0], r), to_double(ct[1], r), to_double(ct[2], r)});
        }
        if (coords.size() != base + static_cast<size_t>(n) || node_tags.size() != coords.size())
          throw ParseError("node block size mismatch", r.line_no);
      }
      if (r.expect("$EndNodes") != "$EndNodes") throw ParseError("missing $EndNodes", r.line_no);
    } else if (line == "$Elements") {
      auto hdr = split_ws(r.expect("elements header"));
      if (hdr.size() != 4) throw ParseError("malformed $Elements header", r.line_no);
      const long n_blocks = to_long(hdr[0], r);
      for (long b = 0; b < n_blocks; ++b) {
        auto bh = split_ws(r.expect("element block header"));
        if (bh.size() != 4) throw ParseError("malformed element block header", r.line_no);
        const long type = to_long(bh[2], r);
        const long n = to_long(bh[3], r);
        for (long i = 0; i < n; ++i) {
          auto et = split_ws(r.expect("element record"));
          if (type == 1 || type == 15) continue;  // lines and points carry no area
          size_t want = type == 2 ? 4 : type == 4 ? 5 : 0;
          if (want == 0)
            throw UnsupportedElement("only linear triangles and tetrahedra are supported "
                                     "(element type " + std::to_string(type) + ")");
          if (et.size() != want) throw ParseError("element has wrong vertex count", r.line_no);
          std::vector<long> verts;
          for (size_t k = 1; k < et.size(); ++k) verts.push_back(to_long(et[k], r));
          (type == 2 ? tris : tets).push_back(std::move(verts));
        }
      }
      if (r.expect("$EndElements") != "$EndElements") throw ParseError("missing $EndElements", r.line_no);
    } else if (!line.empty() && line[0] == '$') {
      const std::string end = "$End" + line.substr(1);
      while (true) {
        if (!r.next(line)) throw ParseError("missing " + end, r.line_no);
        if (line == end) break;
      }
    } else {
      throw ParseError("unexpected content '" + line + "'", r.line_no);
    }
  }
  if (!saw_format) throw ParseError("missing $MeshFormat section", r.line_no);
  if (node_tags.empty()) throw ParseError("mesh has no nodes", r.line_no);

  std::unordered_map<long, int> tag_to_index;
  tag_to_index.reserve(node_tags.size());
  for (size_t i = 0; i < node_tags.size(); ++i) {
    if (!tag_to_index.emplace(node_tags[i], static_cast<int>(i)).second)
      throw ParseError("duplicate node tag " + std::to_string(node_tags[i]), r.line_no);
  }

  const auto& vol = tets.empty() ? tris : tets;
  if (vol.empty()) throw ParseError("mesh has no volume elements", r.line_no);

  Mesh m;
  m.dim = tets.empty() ? 2 : 3;
  const int vpe = m.dim + 1;

  if (m.dim == 2) {
    double zmin = coords[0][2], zmax = coords[0][2];
    for (const auto& c : coords) {
      zmin = std::min(zmin, c[2]);
      zmax = std::max(zmax, c[2]);
    }
    if (zmax - zmin > 1e-9) throw InvalidGeometry("triangle mesh is not planar");
  }

  m.nodes.resize(static_cast<int>(coords.size()), m.dim);
  for (size_t i = 0; i < coords.size(); ++i)
    for (int d = 0; d < m.dim; ++d) m.nodes(static_cast<int>(i), d) = coords[i][static_cast<size_t>(d)];

  m.elements.resize(static_cast<int>(vol.size()), vpe);
  for (size_t e = 0; e < vol.size(); ++e) {
    for (int k = 0; k < vpe; ++k) {
      auto it = tag_to_index.find(vol[e][static_cast<size_t>(k)]);
      if (it == tag_to_index.end())
        throw ParseError("element references unknown node tag " +
                         std::to_string(vol[e][static_cast<size_t>(k)]), r.line_no);
      m.elements(static_cast<int>(e), k) = it->second;
    }
  }
  orient_elements(m);
  detect_boundary(m);
  return m;
}

Mesh generate(const GeometrySpec& spec) {
  switch (spec.kind) {
    case GeometrySpec::Kind::unit_square: {
      if (spec.resolution <= 0.0) throw InvalidGeometry("resolution must be positive");
      const int n = std::max(2, static_cast<int>(std::lround(1.0 / spec.resolution)) + 1);
      return generate_unit_square(n);
    }
    case GeometrySpec::Kind::fins:
      return generate_fins(spec.fins, spec.resolution);
    case GeometrySpec::Kind::external_file:
      return read_msh(spec.path);
  }
  throw InvalidGeometry("unknown geometry kind");
}

PointLocator::PointLocator(const Mesh& m) : mesh_(m) {
  const int dim = m.dim;
  lo_ = m.nodes.colwise().minCoeff().transpose();
  hi_ = m.nodes.colwise().maxCoeff().transpose();

  const int per_axis = std::clamp(
      static_cast<int>(std::floor(std::pow(double(m.num_elements()), 1.0 / dim))), 1, 512);
  nbins_ = Eigen::VectorXi::Constant(dim, per_axis);
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= nbins_(d);
  bins_.assign(static_cast<size_t>(total), {});

  auto cell_of = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXi c(dim);
    for (int d = 0; d < dim; ++d) {
      const double span = std::max(hi_(d) - lo_(d), 1e-300);
      const int i = static_cast<int>(std::floor((x(d) - lo_(d)) / span * nbins_(d)));
      c(d) = std::clamp(i, 0, nbins_(d) - 1);
    }
    return c;
  };

  inv_edges_.resize(static_cast<size_t>(m.num_elements()));
  anchors_.resize(static_cast<size_t>(m.num_elements()));
  for (int e = 0; e < m.num_elements(); ++e) {
    Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
    if (dim == 2)
      J.topLeftCorner<2, 2>() = edge_matrix_2d(m, e);
    else
      J = edge_matrix_3d(m, e);
    inv_edges_[static_cast<size_t>(e)] = J.inverse();
    anchors_[static_cast<size_t>(e)] = Eigen::Vector3d::Zero();
    anchors_[static_cast<size_t>(e)].head(dim) = m.nodes.row(m.elements(e, 0)).transpose();

    Eigen::VectorXd elo = m.nodes.row(m.elements(e, 0)).transpose();
    Eigen::VectorXd ehi = elo;
    for (int k = 1; k <= dim; ++k) {
      Eigen::VectorXd v = m.nodes.row(m.elements(e, k)).transpose();
      elo = elo.cwiseMin(v);
      ehi = ehi.cwiseMax(v);
    }
    const Eigen::VectorXi c0 = cell_of(elo), c1 = cell_of(ehi);
    Eigen::VectorXi c = c0;
    while (true) {
      bins_[static_cast<size_t>(bin_index(c))].push_back(e);
      int d = 0;
      for (; d < dim; ++d) {
        if (c(d) < c1(d)) {
          ++c(d);
          break;
        }
        c(d) = c0(d);
      }
      if (d == dim) break;
    }
  }
}

int PointLocator::bin_index(const Eigen::VectorXi& cell) const {
  int idx = 0;
  for (int d = mesh_.dim - 1; d >= 0; --d) idx = idx * nbins_(d) + cell(d);
  return idx;
}

Eigen::VectorXd PointLocator::barycentric(int e, const Eigen::VectorXd& x) const {
  const int dim = mesh_.dim;
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  d.head(dim) = x - anchors_[static_cast<size_t>(e)].head(dim);
  const Eigen::Vector3d mu = inv_edges_[static_cast<size_t>(e)] * d;
  Eigen::VectorXd bary(dim + 1);
  double rest = 1.0;
  for (int k = 0; k < dim; ++k) {
    bary(k + 1) = mu(k);
    rest -= mu(k);
  }
  bary(0) = rest;
  return bary;
}

std::optional<PointLocator::Hit> PointLocator::try_locate(const Eigen::VectorXd& x) const {
  const int dim = mesh_.dim;
  if (x.size() != dim) throw ShapeMismatch("query point dimension mismatch");
  for (int d = 0; d < dim; ++d)
    if (x(d) < lo_(d) - kTolBarycentric || x(d) > hi_(d) + kTolBarycentric) return std::nullopt;

  Eigen::VectorXi cell(dim);
  for (int d = 0; d < dim; ++d) {
    const double span = std::max(hi_(d) - lo_(d), 1e-300);
    cell(d) = std::clamp(static_cast<int>(std::floor((x(d) - lo_(d)) / span * nbins_(d))), 0,
                         nbins_(d) - 1);
  }

  double best_min = -std::numeric_limits<double>::infinity();
  int best_e = -1;
  Eigen::VectorXd best_bary;

  Eigen::VectorXi off = Eigen::VectorXi::Constant(dim, -1);
  while (true) {
    Eigen::VectorXi c(dim);
    bool valid = true;
    for (int d = 0; d < dim; ++d) {
      c(d) = cell(d) + off(d);
      if (c(d) < 0 || c(d) >= nbins_(d)) valid = false;
    }
    if (valid) {
      for (int e : bins_[static_cast<size_t>(bin_index(c))]) {
        const Eigen::VectorXd bary = barycentric(e, x);
        const double mn = bary.minCoeff();
        if (mn > best_min) {
          best_min = mn;
          best_e = e;
          best_bary = bary;
          if (mn >= 0.0) return Hit{best_e, best_bary};
        }
      }
    }
    int d = 0;
    for (; d < dim; ++d) {
      if (off(d) < 1) {
        ++off(d);
        break;
      }
      off(d) = -1;
    }
    if (d == dim) break;
  }

  if (best_e >= 0 && best_min >= -kTolBarycentric) return Hit{best_e, best_bary};
  return std::nullopt;
}

PointLocator::Hit PointLocator::locate(const Eigen::VectorXd& x) const {
  auto hit = try_locate(x);
  if (!hit) {
    std::ostringstream oss;
    oss << "point (" << x.transpose() << ") is outside the mesh";
    throw NotInDomain(oss.str());
  }
  return *hit;
}

Eigen::MatrixXd interpolate(const Mesh& m, const PointLocator& loc,
                            const Eigen::MatrixXd& nodal, const Eigen::MatrixXd& points) {
  if (nodal.rows() != m.num_nodes()) throw ShapeMismatch("nodal field size mismatch");
  if (points.cols() != m.dim) throw ShapeMismatch("query point dimension mismatch");
  Eigen::MatrixXd out(points.rows(), nodal.cols());
  for (int q = 0; q < points.rows(); ++q) {
    auto hit = loc.try_locate(points.row(q).transpose());
    if (!hit)
      throw NotInDomain("query point " + std::to_string(q) + " is outside the mesh");
    out.row(q).setZero();
    for (int k = 0; k <= m.dim; ++k)
      out.row(q) += hit->bary(k) * nodal.row(m.elements(hit->element, k));
  }
  return out;
}

}  // namespace feen::mesh
