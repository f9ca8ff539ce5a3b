#include "feen/io.hpp"

#include <vector>

#include "feen/container.hpp"
#include "feen/errors.hpp"

namespace feen::io {

namespace {

using container::Container;
using container::Writer;
using json = nlohmann::json;

Container open_kind(const std::string& path, const std::string& kind) {
  Container c = Container::read(path);
  const json& meta = c.meta();
  if (!meta.contains("kind") || meta["kind"] != kind)
    throw IoError(path + ": expected a " + kind + " file, found \"" +
                  meta.value("kind", "?") + "\"");
  return c;
}

Eigen::MatrixXi int_matrix(const Container& c, const std::string& name) {
  const container::Section& s = c.section(name);
  if (s.shape.size() != 2) throw IoError(name + ": expected a 2-d section");
  const std::vector<std::int64_t> flat = c.i64(name);
  Eigen::MatrixXi out(static_cast<long>(s.shape[0]), static_cast<long>(s.shape[1]));
  for (long i = 0; i < out.rows(); ++i)
    for (long j = 0; j < out.cols(); ++j)
      out(i, j) = static_cast<int>(flat[static_cast<size_t>(i * out.cols() + j)]);
  return out;
}

void add_int_matrix(Writer& w, const std::string& name, const Eigen::MatrixXi& m) {
  std::vector<std::int64_t> flat(static_cast<size_t>(m.rows()) * m.cols());
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      flat[static_cast<size_t>(i * m.cols() + j)] = m(i, j);
  w.add_i64(name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
            flat.data());
}

}  // namespace

void save_mesh(const std::string& path, const mesh::Mesh& m, const std::string& geometry) {
  Writer w;
  w.add_f64("nodes", m.nodes);
  add_int_matrix(w, "elements", m.elements);
  w.set_meta({{"kind", "mesh"},
              {"dim", m.dim},
              {"geometry", geometry},
              {"mesh_hash", container::hash_hex(container::mesh_hash(m))}});
  w.write(path);
}

mesh::Mesh load_mesh(const std::string& path) {
  const Container c = open_kind(path, "mesh");
  mesh::Mesh m;
  m.dim = c.meta().at("dim").get<int>();
  m.nodes = c.f64_matrix("nodes");
  m.elements = int_matrix(c, "elements");
  mesh::detect_boundary(m);
  const std::uint64_t stored = container::parse_hash_hex(c.meta().at("mesh_hash"));
  if (container::mesh_hash(m) != stored)
    throw HashMismatch(path + ": mesh content does not match its recorded hash");
  return m;
}

std::string mesh_geometry(const std::string& path) {
  return open_kind(path, "mesh").meta().value("geometry", "custom");
}

void save_basis(const std::string& path, const eig::EigenBasis& basis) {
  Writer w;
  w.add_f64("eigenvalues", basis.eigenvalues);
  w.add_f64("modes", basis.modes);
  w.add_i64("interior_to_node", basis.dofs.interior_to_node);
  w.set_meta({{"kind", "basis"},
              {"n_nodes", basis.dofs.n_nodes()},
              {"mesh_hash", container::hash_hex(basis.mesh_id)},
              {"basis_hash", container::hash_hex(eig::fingerprint(basis))}});
  w.write(path);
}

eig::EigenBasis load_basis(const std::string& path) {
  const Container c = open_kind(path, "basis");
  eig::EigenBasis basis;
  basis.eigenvalues = c.f64_vector("eigenvalues");
  basis.modes = c.f64_matrix("modes");
  basis.mesh_id = container::parse_hash_hex(c.meta().at("mesh_hash"));
  const int n_nodes = c.meta().at("n_nodes").get<int>();
  basis.dofs.node_to_interior.assign(static_cast<size_t>(n_nodes), -1);
  for (std::int64_t node : c.i64("interior_to_node")) {
    basis.dofs.node_to_interior[static_cast<size_t>(node)] =
        static_cast<int>(basis.dofs.interior_to_node.size());
    basis.dofs.interior_to_node.push_back(static_cast<int>(node));
  }
  const std::uint64_t stored = container::parse_hash_hex(c.meta().at("basis_hash"));
  if (eig::fingerprint(basis) != stored)
    throw HashMismatch(path + ": basis content does not match its recorded hash");
  return basis;
}

void save_dataset(const std::string& path, const sim::Dataset& data) {
  Writer w;
  if (data.inputs_u0.rows() > 0) w.add_f64("inputs_u0", data.inputs_u0);
  if (data.inputs_f.rows() > 0) w.add_f64("inputs_f", data.inputs_f);
  w.add_f64("outputs", data.outputs);
  if (!data.snapshot_times.empty())
    w.add_f64("snapshot_times", {data.snapshot_times.size()}, data.snapshot_times.data());
  if (data.f_coeffs.rows() > 0) w.add_f64("f_coeffs", data.f_coeffs);
  json meta = {{"kind", "dataset"},
               {"problem", sim::problem_name(data.problem)},
               {"diffusivity", data.diffusivity},
               {"mesh_hash", container::hash_hex(data.mesh_id)},
               {"grf",
                {{"sigma2", data.grf.sigma2},
                 {"length_scale", data.grf.length_scale},
                 {"n_modes", data.grf.n_modes},
                 {"seed", data.grf.seed}}}};
  if (data.f_coeffs.rows() > 0)
    meta["f_basis_hash"] = container::hash_hex(data.f_basis_hash);
  w.set_meta(meta);
  w.write(path);
}

sim::Dataset load_dataset(const std::string& path) {
  const Container c = open_kind(path, "dataset");
  sim::Dataset data;
  data.problem = sim::problem_from_name(c.meta().at("problem"));
  data.diffusivity = c.meta().at("diffusivity").get<double>();
  data.mesh_id = container::parse_hash_hex(c.meta().at("mesh_hash"));
  const json& g = c.meta().at("grf");
  data.grf.sigma2 = g.at("sigma2").get<double>();
  data.grf.length_scale = g.at("length_scale").get<double>();
  data.grf.n_modes = g.at("n_modes").get<int>();
  data.grf.seed = g.at("seed").get<std::uint64_t>();
  if (c.has("inputs_u0")) data.inputs_u0 = c.f64_matrix("inputs_u0");
  if (c.has("inputs_f")) data.inputs_f = c.f64_matrix("inputs_f");
  data.outputs = c.f64_matrix("outputs");
  if (c.has("snapshot_times")) {
    const Eigen::VectorXd t = c.f64_vector("snapshot_times");
    data.snapshot_times.assign(t.data(), t.data() + t.size());
  }
  if (c.has("f_coeffs")) {
    data.f_coeffs = c.f64_matrix("f_coeffs");
    data.f_basis_hash = container::parse_hash_hex(c.meta().at("f_basis_hash"));
  }
  return data;
}

void save_model(const std::string& path, const learn::BranchModel& model) {
  Writer w;
  w.add_f64("weights", model.weights);
  w.add_f64("bias", model.bias);
  w.add_f64("eigenvalues", model.eigenvalues);
  const auto norm_mode = [](const learn::Normalizer& n) {
    return n.mode == learn::Normalizer::Mode::zscore ? "zscore" : "identity";
  };
  if (model.input_norm.mode == learn::Normalizer::Mode::zscore) {
    w.add_f64("input_mean", model.input_norm.mean);
    w.add_f64("input_std", model.input_norm.std);
  }
  if (model.output_norm.mode == learn::Normalizer::Mode::zscore) {
    w.add_f64("output_mean", model.output_norm.mean);
    w.add_f64("output_std", model.output_norm.std);
  }
  w.set_meta({{"kind", "model"},
              {"variant", spectral::variant_name(model.rule.variant)},
              {"diffusivity", model.rule.diffusivity},
              {"input_norm", norm_mode(model.input_norm)},
              {"output_norm", norm_mode(model.output_norm)},
              {"basis_hash", container::hash_hex(model.basis_hash)},
              {"mesh_hash", container::hash_hex(model.mesh_id)},
              {"split_seed", model.split_seed},
              {"train_fraction", model.train_fraction}});
  w.write(path);
}

learn::BranchModel load_model(const std::string& path) {
  const Container c = open_kind(path, "model");
  learn::BranchModel model;
  model.weights = c.f64_matrix("weights");
  model.bias = c.f64_vector("bias");
  model.eigenvalues = c.f64_vector("eigenvalues");
  model.rule.variant = spectral::variant_from_name(c.meta().at("variant"));
  model.rule.diffusivity = c.meta().at("diffusivity").get<double>();
  if (c.meta().at("input_norm") == "zscore") {
    model.input_norm.mode = learn::Normalizer::Mode::zscore;
    model.input_norm.mean = c.f64_vector("input_mean");
    model.input_norm.std = c.f64_vector("input_std");
  }
  if (c.meta().at("output_norm") == "zscore") {
    model.output_norm.mode = learn::Normalizer::Mode::zscore;
    model.output_norm.mean = c.f64_vector("output_mean");
    model.output_norm.std = c.f64_vector("output_std");
  }
  model.basis_hash = container::parse_hash_hex(c.meta().at("basis_hash"));
  model.mesh_id = container::parse_hash_hex(c.meta().at("mesh_hash"));
  model.split_seed = c.meta().value("split_seed", std::uint64_t{0});
  model.train_fraction = c.meta().value("train_fraction", 0.9);
  return model;
}

void save_field(const std::string& path, const Eigen::VectorXd& values, std::uint64_t mesh_id) {
  Writer w;
  w.add_f64("values", values);
  w.set_meta({{"kind", "field"}, {"mesh_hash", container::hash_hex(mesh_id)}});
  w.write(path);
}

Field load_field(const std::string& path) {
  const Container c = open_kind(path, "field");
  return {c.f64_vector("values"), container::parse_hash_hex(c.meta().at("mesh_hash"))};
}

std::string kind_of(const std::string& path) {
  return Container::read(path).meta().value("kind", "");
}

void require_match(std::uint64_t actual, std::uint64_t expected, const std::string& what) {
  if (actual != expected)
    throw HashMismatch(what + ": content hash " + container::hash_hex(actual) +
                       " does not match expected " + container::hash_hex(expected));
}

}  // namespace feen::io
