#include "feen/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feen/container.hpp"
#include "feen/eig.hpp"
#include "feen/errors.hpp"
#include "feen/fem.hpp"
#include "feen/grf.hpp"
#include "feen/io.hpp"
#include "feen/learn.hpp"
#include "feen/mesh.hpp"
#include "feen/metrics.hpp"
#include "feen/sim.hpp"
#include "feen/spectral.hpp"
#include "feen/vtk.hpp"

namespace feen::cli {

namespace {

using json = nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_f64(const std::string& tok, const std::string& what) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0') throw ParseError(what + ": not a number: \"" + tok + "\"");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_list_f64(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& tok : split(s, ',')) {
    if (tok.empty()) throw ParseError(what + ": empty entry in \"" + s + "\"");
    out.push_back(parse_f64(tok, what));
  }
  return out;
}

std::vector<int> parse_list_int(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_list_f64(s, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ParseError(what + ": expected integers in \"" + s + "\"");
    out.push_back(i);
  }
  return out;
}

learn::Normalizer::Mode norm_mode(const std::string& name) {
  if (name == "zscore") return learn::Normalizer::Mode::zscore;
  if (name == "identity") return learn::Normalizer::Mode::identity;
  throw ParseError("unknown normalizer mode '" + name + "' (use zscore or identity)");
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  if (!f) throw IoError("failed writing " + path);
}

// ---- run configuration ------------------------------------------------------

// Every field is optional; flags given on the command line take precedence.
struct RunConfig {
  std::optional<std::string> geometry_kind, geometry_path;
  std::optional<int> n;
  std::optional<double> resolution;
  std::optional<double> base_width, base_height, fin_width, fin_length;
  std::optional<int> fin_count;

  std::optional<std::string> problem;
  std::optional<double> diffusivity, t_final, dt;
  std::optional<std::vector<double>> snapshot_times;

  std::optional<double> sigma2, length_scale;
  std::optional<int> n_waves;
  std::optional<std::uint64_t> grf_seed;

  std::optional<int> modes;

  std::optional<double> learning_rate, train_fraction;
  std::optional<long> iterations;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::string> input_norm, output_norm;

  std::map<std::string, std::string> paths;
};

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParseError("config: " + where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) throw ParseError("config: unknown key \"" + item.key() + "\" in " + where);
  }
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file: " + path);
  RunConfig c;
  try {
    const json j = json::parse(f);
    require_keys(j, "the root object", {"geometry", "problem", "grf", "modes", "train", "paths"});
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      require_keys(g, "geometry",
                   {"kind", "path", "n", "resolution", "base_width", "base_height", "fin_count",
                    "fin_width", "fin_length"});
      read_opt(g, "kind", c.geometry_kind);
      read_opt(g, "path", c.geometry_path);
      read_opt(g, "n", c.n);
      read_opt(g, "resolution", c.resolution);
      read_opt(g, "base_width", c.base_width);
      read_opt(g, "base_height", c.base_height);
      read_opt(g, "fin_count", c.fin_count);
      read_opt(g, "fin_width", c.fin_width);
      read_opt(g, "fin_length", c.fin_length);
    }
    if (j.contains("problem")) {
      const json& p = j.at("problem");
      require_keys(p, "problem", {"kind", "diffusivity", "t_final", "dt", "snapshot_times"});
      read_opt(p, "kind", c.problem);
      read_opt(p, "diffusivity", c.diffusivity);
      read_opt(p, "t_final", c.t_final);
      read_opt(p, "dt", c.dt);
      read_opt(p, "snapshot_times", c.snapshot_times);
    }
    if (j.contains("grf")) {
      const json& g = j.at("grf");
      require_keys(g, "grf", {"sigma2", "length_scale", "n_waves", "seed"});
      read_opt(g, "sigma2", c.sigma2);
      read_opt(g, "length_scale", c.length_scale);
      read_opt(g, "n_waves", c.n_waves);
      read_opt(g, "seed", c.grf_seed);
    }
    read_opt(j, "modes", c.modes);
    if (j.contains("train")) {
      const json& t = j.at("train");
      require_keys(t, "train",
                   {"learning_rate", "iterations", "batch_size", "seed", "train_fraction",
                    "input_norm", "output_norm"});
      read_opt(t, "learning_rate", c.learning_rate);
      read_opt(t, "iterations", c.iterations);
      read_opt(t, "batch_size", c.batch_size);
      read_opt(t, "seed", c.train_seed);
      read_opt(t, "train_fraction", c.train_fraction);
      read_opt(t, "input_norm", c.input_norm);
      read_opt(t, "output_norm", c.output_norm);
    }
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      require_keys(p, "paths", {"mesh", "basis", "dataset", "model", "history", "report"});
      for (const auto& item : p.items()) c.paths[item.key()] = item.value().get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return c;
}

// Config fills in only what the command line left unset.
template <class T, class U>
void merge(const CLI::Option* opt, T& dst, const std::optional<U>& src) {
  if (opt->count() == 0 && src.has_value()) dst = static_cast<T>(*src);
}

void merge_path(const CLI::Option* opt, std::string& dst, const RunConfig& cfg,
                const std::string& key) {
  const auto it = cfg.paths.find(key);
  if (opt->count() == 0 && it != cfg.paths.end()) dst = it->second;
}

void need(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ParseError("missing required " + flag);
}

// ---- shared pieces ----------------------------------------------------------

std::uint64_t hash_of(const mesh::Mesh& m) { return container::mesh_hash(m); }

struct Loaded {
  mesh::Mesh mesh;
  eig::EigenBasis basis;
};

// Mesh, basis, and any dataset/model must all descend from the same mesh
// bytes; a stale pair exits with code 5 before any compute happens.
Loaded load_bound(const std::string& mesh_path, const std::string& basis_path) {
  Loaded out;
  out.mesh = io::load_mesh(mesh_path);
  out.basis = io::load_basis(basis_path);
  io::require_match(out.basis.mesh_id, hash_of(out.mesh), "basis / mesh binding");
  return out;
}

struct ReportRow {
  std::string problem, geometry;
  int m = 0;
  int n_points = 0;
  double rel_l2 = 0.0, rel_h1 = 0.0;
  std::uint64_t seed = 0;
};

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string("# aggregation: ") + metrics::Report::kAggregation + "\n";
  out += "problem,geometry,M,n_points,rel_l2,rel_h1,seed\n";
  for (const ReportRow& r : rows)
    out += r.problem + "," + r.geometry + "," + std::to_string(r.m) + "," +
           std::to_string(r.n_points) + "," + fmt17(r.rel_l2) + "," + fmt17(r.rel_h1) + "," +
           std::to_string(r.seed) + "\n";
  return out;
}

json report_json(const std::vector<ReportRow>& rows) {
  json rows_j = json::array();
  for (const ReportRow& r : rows)
    rows_j.push_back({{"problem", r.problem},
                      {"geometry", r.geometry},
                      {"M", r.m},
                      {"n_points", r.n_points},
                      {"rel_l2", r.rel_l2},
                      {"rel_h1", r.rel_h1},
                      {"seed", r.seed}});
  return {{"aggregation", metrics::Report::kAggregation}, {"rows", rows_j}};
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& report_path,
                 bool json_mode, const json& extra) {
  if (!report_path.empty()) write_text(report_path, report_csv(rows));
  if (json_mode) {
    json j = report_json(rows);
    for (const auto& item : extra.items()) j[item.key()] = item.value();
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const ReportRow& r : rows)
    std::printf("problem=%s geometry=%s M=%d n_points=%d rel_l2=%.6e rel_h1=%.6e seed=%llu\n",
                r.problem.c_str(), r.geometry.c_str(), r.m, r.n_points, r.rel_l2, r.rel_h1,
                static_cast<unsigned long long>(r.seed));
  std::printf("aggregation: %s\n", metrics::Report::kAggregation);
  if (!report_path.empty()) std::printf("wrote %s\n", report_path.c_str());
}

// Query points from CSV rows x[,y[,z]][,t]; a non-numeric first line is
// treated as a header.  Column count is pinned by the mesh dimension.
struct QueryPoints {
  Eigen::MatrixXd pts;
  std::vector<double> t;
  bool has_t = false;
};

QueryPoints read_points_csv(const std::string& path, int dim) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open points file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> toks = split(line, ',');
    std::vector<double> row;
    bool numeric = true;
    for (const std::string& tok : toks) {
      const char* s = tok.c_str();
      char* end = nullptr;
      const double v = std::strtod(s, &end);
      if (end == s || *end != '\0') {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(path + ": malformed row \"" + line + "\"");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no query points");
  const size_t cols = rows.front().size();
  for (const std::vector<double>& r : rows)
    if (r.size() != cols) throw ShapeMismatch(path + ": rows have mixed column counts");
  QueryPoints q;
  if (cols == static_cast<size_t>(dim)) {
    q.has_t = false;
  } else if (cols == static_cast<size_t>(dim) + 1) {
    q.has_t = true;
  } else {
    throw ShapeMismatch(path + ": expected " + std::to_string(dim) + " or " +
                        std::to_string(dim + 1) + " columns for a " + std::to_string(dim) +
                        "-d mesh, found " + std::to_string(cols));
  }
  q.pts.resize(static_cast<long>(rows.size()), dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int d = 0; d < dim; ++d) q.pts(static_cast<long>(i), d) = rows[i][static_cast<size_t>(d)];
    if (q.has_t) q.t.push_back(rows[i][static_cast<size_t>(dim)]);
  }
  return q;
}

// Forward pass over query rows, batching rows that share a time value so the
// reconstruction scale is applied once per distinct t.
Eigen::VectorXd predict_rows(const learn::BranchModel& model, const Eigen::VectorXd& sensors,
                             const std::optional<Eigen::VectorXd>& f_coeffs,
                             const Eigen::MatrixXd& eval, const QueryPoints& q,
                             std::optional<double> t_flag) {
  if (!q.has_t)
    return learn::forward(model, sensors, f_coeffs, t_flag, eval);
  std::map<double, std::vector<long>> groups;
  for (size_t i = 0; i < q.t.size(); ++i) groups[q.t[i]].push_back(static_cast<long>(i));
  Eigen::VectorXd out(eval.rows());
  for (const auto& [t, ids] : groups) {
    Eigen::MatrixXd sub(static_cast<long>(ids.size()), eval.cols());
    for (size_t k = 0; k < ids.size(); ++k) sub.row(static_cast<long>(k)) = eval.row(ids[k]);
    const Eigen::VectorXd vals = learn::forward(model, sensors, f_coeffs, t, sub);
    for (size_t k = 0; k < ids.size(); ++k) out(ids[k]) = vals(static_cast<long>(k));
  }
  return out;
}

// ---- subcommand options -----------------------------------------------------

struct MeshOpts {
  std::string geometry = "square";
  int n = 0;
  double resolution = 0.0;
  std::string msh_path;
  mesh::FinsParams fins;
  std::string out;
};

struct EigenOpts {
  std::string mesh_path, out;
  int modes = 0;
  double tol = 1e-8;
};

struct DataOpts {
  std::string mesh_path, basis_path, out;
  std::string problem = "poisson";
  int samples = 0;
  sim::ProblemSpec ps;
  grf::GrfSpec grf;
  std::string snapshots;
};

struct TrainOpts {
  std::string data_path, basis_path, mesh_path, out, history;
  learn::TrainConfig cfg;
  std::string input_norm = "zscore", output_norm = "identity";
  bool json = false;
};

struct EvalOpts {
  std::string model_path, data_path, basis_path, mesh_path, report;
  // Split overrides; the model's recorded split is the default.
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  bool json = false;
};

struct PredictOpts {
  std::string model_path, basis_path, mesh_path, data_path, input_path, points, out, vtk;
  int sample = 0;
  double t = 0.0;
  bool has_t = false;
};

struct ResolutionOpts {
  std::string model_path, data_path, basis_path, mesh_path, report;
  std::string factors = "2,4";
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  bool json = false;
};

struct ModesOpts {
  std::string mesh_path, data_path, report;
  std::string m_values = "25,50,100";
  learn::TrainConfig cfg;
  bool json = false;
};

struct ApplyGOpts {
  std::string basis_path, mesh_path, input_path, function, out, vtk;
};

// ---- subcommands --------------------------------------------------------------

int cmd_mesh(const MeshOpts& o) {
  need(o.out, "--output");
  mesh::GeometrySpec spec;
  std::string label = o.geometry;
  if (o.geometry == "square") {
    spec.kind = mesh::GeometrySpec::Kind::unit_square;
    if (o.n != 0) {
      if (o.n < 2) throw ParseError("--n must be at least 2");
      spec.resolution = 1.0 / (o.n - 1);
    } else if (o.resolution != 0.0) {
      if (!(o.resolution > 0.0)) throw ParseError("--resolution must be positive");
      spec.resolution = o.resolution;
    }
  } else if (o.geometry == "fins") {
    spec.kind = mesh::GeometrySpec::Kind::fins;
    spec.fins = o.fins;
    if (o.resolution != 0.0) {
      if (!(o.resolution > 0.0)) throw ParseError("--resolution must be positive");
      spec.resolution = o.resolution;
    }
  } else if (o.geometry == "file") {
    spec.kind = mesh::GeometrySpec::Kind::external_file;
    need(o.msh_path, "--path");
    spec.path = o.msh_path;
    label = std::filesystem::path(o.msh_path).stem().string();
  } else {
    throw ParseError("unknown geometry '" + o.geometry + "' (use square, fins, or file)");
  }

  mesh::Mesh m;
  try {
    m = mesh::generate(spec);
  } catch (const InvalidGeometry& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateElement& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return 3;
  } catch (const UnsupportedElement& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return 3;
  }

  io::save_mesh(o.out, m, label);
  std::printf("mesh %s: %ld nodes, %ld elements, %zu boundary nodes\n", label.c_str(),
              static_cast<long>(m.nodes.rows()), static_cast<long>(m.elements.rows()),
              m.boundary_nodes.size());
  std::printf("wrote %s\n", o.out.c_str());
  return 0;
}

int cmd_eigen(const EigenOpts& o) {
  need(o.mesh_path, "--mesh");
  need(o.out, "--output");
  if (o.modes <= 0) throw ParseError("--modes must be a positive integer");
  const mesh::Mesh m = io::load_mesh(o.mesh_path);
  const long n_interior = m.nodes.rows() - static_cast<long>(m.boundary_nodes.size());
  if (o.modes > n_interior)
    throw ParseError("requested " + std::to_string(o.modes) + " modes but the mesh has only " +
                     std::to_string(n_interior) + " interior dofs");
  const eig::EigenBasis basis = eig::build_eigenbasis(m, o.modes, o.tol);
  io::save_basis(o.out, basis);
  for (int k = 0; k < std::min(5, basis.m()); ++k)
    std::printf("lambda[%d] = %.10g\n", k + 1, basis.eigenvalues(k));
  std::printf("wrote %s (%d modes, %d interior dofs)\n", o.out.c_str(), basis.m(),
              basis.n_interior());
  return 0;
}

int cmd_data(const DataOpts& o) {
  need(o.mesh_path, "--mesh");
  need(o.out, "--output");
  if (o.samples <= 0) throw ParseError("--samples must be a positive integer");
  const mesh::Mesh m = io::load_mesh(o.mesh_path);

  sim::ProblemSpec ps = o.ps;
  ps.problem = sim::problem_from_name(o.problem);
  if (sim::is_heat(ps.problem)) {
    ps.snapshot_times = o.snapshots.empty() ? sim::default_snapshot_times(ps.t_final)
                                            : parse_list_f64(o.snapshots, "--snapshots");
  } else {
    ps.snapshot_times.clear();
  }
  sim::validate(ps);

  sim::Dataset data = sim::build_dataset(m, ps, o.grf, o.samples);
  if (!o.basis_path.empty()) {
    if (ps.problem != sim::Problem::heat_forced)
      throw ParseError("--basis only applies to heat_forced datasets");
    const eig::EigenBasis basis = io::load_basis(o.basis_path);
    io::require_match(basis.mesh_id, hash_of(m), "basis / mesh binding");
    sim::attach_forcing_coeffs(data, m, basis);
  }
  io::save_dataset(o.out, data);
  std::printf("%s dataset: %d samples, %d nodes", sim::problem_name(ps.problem).c_str(),
              data.n_samples(), data.n_nodes());
  if (sim::is_heat(ps.problem)) std::printf(", %d snapshots", data.n_snapshots());
  if (data.f_coeffs.rows() > 0) std::printf(", forcing coefficients for %ld modes",
                                            static_cast<long>(data.f_coeffs.cols()));
  std::printf("\nwrote %s\n", o.out.c_str());
  return 0;
}

int cmd_train(const TrainOpts& o) {
  need(o.data_path, "--data");
  need(o.basis_path, "--basis");
  need(o.out, "--output");
  sim::Dataset data = io::load_dataset(o.data_path);
  const eig::EigenBasis basis = io::load_basis(o.basis_path);
  io::require_match(data.mesh_id, basis.mesh_id, "dataset / basis mesh binding");

  if (data.problem == sim::Problem::heat_forced) {
    if (data.f_coeffs.rows() == 0) {
      need(o.mesh_path, "--mesh (forced dataset has no stored forcing coefficients)");
      const mesh::Mesh m = io::load_mesh(o.mesh_path);
      io::require_match(hash_of(m), data.mesh_id, "mesh / dataset binding");
      sim::attach_forcing_coeffs(data, m, basis);
    } else {
      io::require_match(data.f_basis_hash, eig::fingerprint(basis),
                        "forcing coefficients / basis binding");
    }
  }

  const spectral::ReconstructionRule rule = learn::default_rule(data);
  const learn::TrainingSet set(data, basis, rule, o.cfg, norm_mode(o.input_norm),
                               norm_mode(o.output_norm));
  learn::BranchModel model = learn::init_model(set.n_sensors(), set.n_modes(), rule, o.cfg.seed);
  const learn::TrainResult res = learn::train(std::move(model), set, o.cfg);
  io::save_model(o.out, res.model);

  if (!o.history.empty()) {
    std::string csv = "iteration,mse\n0," + fmt17(res.initial_mse) + "\n";
    for (const auto& [it, mse] : res.history) csv += std::to_string(it) + "," + fmt17(mse) + "\n";
    write_text(o.history, csv);
  }
  if (o.json) {
    const json j = {{"m", res.model.m()},          {"p", res.model.p()},
                    {"iterations", o.cfg.iterations}, {"initial_mse", res.initial_mse},
                    {"final_mse", res.final_mse},  {"seed", o.cfg.seed}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("trained %d modes on %d sensors: mse %.6e -> %.6e over %ld iterations\n",
                res.model.m(), res.model.p(), res.initial_mse, res.final_mse, o.cfg.iterations);
    std::printf("wrote %s\n", o.out.c_str());
    if (!o.history.empty()) std::printf("wrote %s\n", o.history.c_str());
  }
  return 0;
}

// The split rebuild below must use the seed and train fraction from training
// time; both default to the training defaults.
learn::TrainConfig split_config(std::uint64_t seed, double fraction) {
  learn::TrainConfig cfg;
  cfg.seed = seed;
  cfg.train_fraction = fraction;
  return cfg;
}

int cmd_eval(const EvalOpts& o) {
  need(o.model_path, "--model");
  need(o.data_path, "--data");
  need(o.basis_path, "--basis");
  need(o.mesh_path, "--mesh");
  const Loaded lb = load_bound(o.mesh_path, o.basis_path);
  sim::Dataset data = io::load_dataset(o.data_path);
  const learn::BranchModel model = io::load_model(o.model_path);
  io::require_match(data.mesh_id, hash_of(lb.mesh), "dataset / mesh binding");
  io::require_match(model.mesh_id, hash_of(lb.mesh), "model / mesh binding");
  io::require_match(model.basis_hash, eig::fingerprint(lb.basis), "model / basis binding");
  if (data.problem == sim::Problem::heat_forced) {
    if (data.f_coeffs.rows() == 0)
      sim::attach_forcing_coeffs(data, lb.mesh, lb.basis);
    else
      io::require_match(data.f_basis_hash, eig::fingerprint(lb.basis),
                        "forcing coefficients / basis binding");
  }

  const std::uint64_t seed = o.seed.value_or(model.split_seed);
  const double fraction = o.train_fraction.value_or(model.train_fraction);
  const learn::TrainingSet set(data, lb.basis, model.rule, split_config(seed, fraction),
                               model.input_norm.mode, model.output_norm.mode);
  const fem::FemSystem sys = fem::assemble_system(lb.mesh);
  const metrics::Report rep = metrics::evaluate_heldout(model, set, data, lb.basis, sys);

  ReportRow row;
  row.problem = sim::problem_name(data.problem);
  row.geometry = io::mesh_geometry(o.mesh_path);
  row.m = model.m();
  row.n_points = static_cast<int>(lb.mesh.nodes.rows());
  row.rel_l2 = rep.mean_rel_l2;
  row.rel_h1 = rep.mean_rel_h1;
  row.seed = seed;

  json extra = {{"held_out_samples", rep.samples},
                {"per_sample_rel_l2", rep.rel_l2},
                {"per_sample_rel_h1", rep.rel_h1}};
  if (!o.json)
    std::printf("held-out samples: %zu\n", rep.samples.size());
  emit_report({row}, o.report, o.json, extra);
  return 0;
}

int cmd_predict(const PredictOpts& o) {
  need(o.model_path, "--model");
  need(o.basis_path, "--basis");
  need(o.mesh_path, "--mesh");
  if (o.points.empty() && o.vtk.empty())
    throw ParseError("nothing to do: pass --points and/or --export-vtk");
  const Loaded lb = load_bound(o.mesh_path, o.basis_path);
  const learn::BranchModel model = io::load_model(o.model_path);
  io::require_match(model.mesh_id, hash_of(lb.mesh), "model / mesh binding");
  io::require_match(model.basis_hash, eig::fingerprint(lb.basis), "model / basis binding");

  const bool forced = model.rule.variant == spectral::Variant::heat_forced_ode;
  const bool heat = model.rule.variant != spectral::Variant::poisson_scaled;

  Eigen::VectorXd sensors;
  std::optional<Eigen::VectorXd> f_coeffs;
  if (!o.data_path.empty()) {
    const sim::Dataset data = io::load_dataset(o.data_path);
    io::require_match(data.mesh_id, hash_of(lb.mesh), "dataset / mesh binding");
    if (o.sample < 0 || o.sample >= data.n_samples())
      throw ParseError("--sample out of range: dataset has " + std::to_string(data.n_samples()) +
                       " samples");
    sensors = data.branch_input(o.sample);
    if (forced) {
      if (data.f_coeffs.rows() == 0)
        throw ParseError("forced predictions need a dataset with stored forcing coefficients");
      io::require_match(data.f_basis_hash, eig::fingerprint(lb.basis),
                        "forcing coefficients / basis binding");
      f_coeffs = Eigen::VectorXd(data.f_coeffs.row(o.sample).transpose());
    }
  } else if (!o.input_path.empty()) {
    if (forced) throw ParseError("forced predictions need --data (forcing travels with it)");
    const io::Field field = io::load_field(o.input_path);
    io::require_match(field.mesh_id, hash_of(lb.mesh), "input field / mesh binding");
    sensors = field.values;
  } else {
    throw ParseError("pass --data with --sample, or --input with a sensor field");
  }
  if (sensors.size() != lb.mesh.nodes.rows())
    throw ShapeMismatch("sensor field length does not match the mesh node count");

  const std::optional<double> t_flag = o.has_t ? std::optional<double>(o.t) : std::nullopt;
  if (!heat && o.has_t) throw ParseError("--t only applies to heat models");

  if (!o.points.empty()) {
    const QueryPoints q = read_points_csv(o.points, lb.mesh.dim);
    if (!heat && q.has_t)
      throw ParseError(o.points + ": time column supplied for a time-independent model");
    if (q.has_t && o.has_t) throw ParseError("--t conflicts with a time column in --points");
    const mesh::PointLocator loc(lb.mesh);
    const Eigen::MatrixXd eval = eig::evaluate_at_points(lb.basis, lb.mesh, loc, q.pts);
    const Eigen::VectorXd values = predict_rows(model, sensors, f_coeffs, eval, q, t_flag);

    std::string csv = lb.mesh.dim == 2 ? "x,y" : "x,y,z";
    if (q.has_t) csv += ",t";
    csv += ",value\n";
    for (long i = 0; i < q.pts.rows(); ++i) {
      for (int d = 0; d < lb.mesh.dim; ++d) csv += (d ? "," : "") + fmt17(q.pts(i, d));
      if (q.has_t) csv += "," + fmt17(q.t[static_cast<size_t>(i)]);
      csv += "," + fmt17(values(i)) + "\n";
    }
    if (o.out.empty())
      std::cout << csv;
    else {
      write_text(o.out, csv);
      std::printf("wrote %s (%ld points)\n", o.out.c_str(), q.pts.rows());
    }
  }

  if (!o.vtk.empty()) {
    const Eigen::MatrixXd eval = eig::evaluate_at_nodes(lb.basis);
    const Eigen::VectorXd values = learn::forward(model, sensors, f_coeffs, t_flag, eval);
    vtk::write_fields(o.vtk, lb.mesh, {{"prediction", values}});
    std::printf("wrote %s\n", o.vtk.c_str());
  }
  return 0;
}

int cmd_study_resolution(const ResolutionOpts& o) {
  need(o.model_path, "--model");
  need(o.data_path, "--data");
  need(o.basis_path, "--basis");
  need(o.mesh_path, "--mesh");
  const Loaded lb = load_bound(o.mesh_path, o.basis_path);
  sim::Dataset data = io::load_dataset(o.data_path);
  const learn::BranchModel model = io::load_model(o.model_path);
  io::require_match(data.mesh_id, hash_of(lb.mesh), "dataset / mesh binding");
  io::require_match(model.mesh_id, hash_of(lb.mesh), "model / mesh binding");
  io::require_match(model.basis_hash, eig::fingerprint(lb.basis), "model / basis binding");
  if (data.problem == sim::Problem::heat_forced && data.f_coeffs.rows() == 0)
    sim::attach_forcing_coeffs(data, lb.mesh, lb.basis);

  std::vector<int> factors = parse_list_int(o.factors, "--factors");
  for (int f : factors)
    if (f < 1) throw ParseError("--factors entries must be at least 1");
  if (std::find(factors.begin(), factors.end(), 1) == factors.end())
    factors.insert(factors.begin(), 1);

  std::vector<Eigen::MatrixXd> grids;
  for (int f : factors) grids.push_back(metrics::densified_lattice(lb.mesh, f));

  const std::uint64_t seed = o.seed.value_or(model.split_seed);
  const double fraction = o.train_fraction.value_or(model.train_fraction);
  const learn::TrainingSet set(data, lb.basis, model.rule, split_config(seed, fraction),
                               model.input_norm.mode, model.output_norm.mode);
  const std::vector<metrics::ResolutionRow> rows =
      metrics::resolution_study(model, set, data, lb.basis, lb.mesh, grids);

  std::vector<ReportRow> out;
  for (const metrics::ResolutionRow& r : rows) {
    ReportRow row;
    row.problem = sim::problem_name(data.problem);
    row.geometry = io::mesh_geometry(o.mesh_path);
    row.m = model.m();
    row.n_points = r.n_points;
    row.rel_l2 = r.rel_l2;
    row.rel_h1 = r.rel_h1;
    row.seed = seed;
    out.push_back(row);
  }
  json extra = json::object();
  {
    json f = json::array();
    for (int v : factors) f.push_back(v);
    extra["factors"] = f;
  }
  emit_report(out, o.report, o.json, extra);
  return 0;
}

int cmd_study_modes(const ModesOpts& o) {
  need(o.mesh_path, "--mesh");
  need(o.data_path, "--data");
  const mesh::Mesh m = io::load_mesh(o.mesh_path);
  const sim::Dataset data = io::load_dataset(o.data_path);
  io::require_match(data.mesh_id, hash_of(m), "dataset / mesh binding");

  const std::vector<int> m_values = parse_list_int(o.m_values, "--m-values");
  const std::vector<metrics::ModeCountRow> rows = metrics::mode_count_study(m, data, m_values, o.cfg);

  std::vector<ReportRow> out;
  for (const metrics::ModeCountRow& r : rows) {
    ReportRow row;
    row.problem = sim::problem_name(data.problem);
    row.geometry = io::mesh_geometry(o.mesh_path);
    row.m = r.m;
    row.n_points = static_cast<int>(m.nodes.rows());
    row.rel_l2 = r.rel_l2;
    row.rel_h1 = r.rel_h1;
    row.seed = o.cfg.seed;
    out.push_back(row);
  }
  emit_report(out, o.report, o.json, json::object());
  return 0;
}

int cmd_apply_g(const ApplyGOpts& o) {
  need(o.basis_path, "--basis");
  need(o.mesh_path, "--mesh");
  need(o.input_path, "--input");
  need(o.function, "--function");
  need(o.out, "--output");
  const Loaded lb = load_bound(o.mesh_path, o.basis_path);
  const io::Field field = io::load_field(o.input_path);
  io::require_match(field.mesh_id, hash_of(lb.mesh), "input field / mesh binding");
  const auto g = spectral::parse_g(o.function);
  const fem::FemSystem sys = fem::assemble_system(lb.mesh);
  const Eigen::VectorXd out = spectral::apply_spectral_function(lb.basis, sys.mass, g, field.values);
  io::save_field(o.out, out, field.mesh_id);
  if (!o.vtk.empty()) {
    vtk::write_fields(o.vtk, lb.mesh, {{"input", field.values}, {"result", out}});
    std::printf("wrote %s\n", o.vtk.c_str());
  }
  std::printf("applied %s over %d modes\nwrote %s\n", o.function.c_str(), lb.basis.m(),
              o.out.c_str());
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"FEM eigenbasis networks: precompute a Laplacian eigenbasis, train an affine "
               "branch network on sensor data, reconstruct PDE solutions anywhere."};
  app.require_subcommand(1);
  std::string config_path;

  MeshOpts mo;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Generate or import a mesh");
  auto* mo_geom = mesh_cmd->add_option("--geometry", mo.geometry, "square, fins, or file")
                      ->check(CLI::IsMember({"square", "fins", "file"}));
  auto* mo_n = mesh_cmd->add_option("--n", mo.n, "nodes per side (square)");
  auto* mo_res = mesh_cmd->add_option("--resolution", mo.resolution, "target edge length");
  mo_n->excludes(mo_res);
  auto* mo_path = mesh_cmd->add_option("--path", mo.msh_path, "mesh file to import (.msh)");
  auto* mo_fins = mesh_cmd->add_option("--fins", mo.fins.fin_count, "fin count (0 for a plain rectangle)")
                      ->check(CLI::NonNegativeNumber);
  auto* mo_fw = mesh_cmd->add_option("--fin-width", mo.fins.fin_width, "fin width");
  auto* mo_fl = mesh_cmd->add_option("--fin-length", mo.fins.fin_length, "fin length");
  auto* mo_bw = mesh_cmd->add_option("--base-width", mo.fins.base_width, "base rectangle width");
  auto* mo_bh = mesh_cmd->add_option("--base-height", mo.fins.base_height, "base rectangle height");
  auto* mo_out = mesh_cmd->add_option("-o,--output", mo.out, "output mesh file");
  mesh_cmd->add_option("--config", config_path, "RunConfig JSON file");

  EigenOpts eo;
  CLI::App* eigen_cmd = app.add_subcommand("eigen", "Compute the Laplacian eigenbasis of a mesh");
  auto* eo_mesh = eigen_cmd->add_option("--mesh", eo.mesh_path, "input mesh file");
  auto* eo_modes = eigen_cmd->add_option("--modes", eo.modes, "number of eigenpairs");
  eigen_cmd->add_option("--tol", eo.tol, "relative residual tolerance")
      ->check(CLI::PositiveNumber);
  auto* eo_out = eigen_cmd->add_option("-o,--output", eo.out, "output basis file");
  eigen_cmd->add_option("--config", config_path, "RunConfig JSON file");

  DataOpts dso;
  CLI::App* data_cmd = app.add_subcommand("data", "Sample random fields and solve for ground truth");
  auto* do_mesh = data_cmd->add_option("--mesh", dso.mesh_path, "input mesh file");
  auto* do_problem = data_cmd->add_option("--problem", dso.problem,
                                          "poisson, heat_homogeneous, or heat_forced")
                         ->check(CLI::IsMember({"poisson", "heat_homogeneous", "heat_forced"}));
  data_cmd->add_option("--samples", dso.samples, "number of samples")->check(CLI::PositiveNumber);
  auto* do_s2 = data_cmd->add_option("--sigma2", dso.grf.sigma2, "random field variance");
  auto* do_ell = data_cmd->add_option("--ell", dso.grf.length_scale, "correlation length");
  auto* do_waves = data_cmd->add_option("--waves", dso.grf.n_modes, "random wave count");
  auto* do_seed = data_cmd->add_option("--grf-seed", dso.grf.seed, "field sampling seed");
  auto* do_diff = data_cmd->add_option("--diffusivity", dso.ps.diffusivity, "heat diffusivity");
  auto* do_tf = data_cmd->add_option("--t-final", dso.ps.t_final, "final time");
  auto* do_dt = data_cmd->add_option("--dt", dso.ps.dt, "time step");
  auto* do_snaps = data_cmd->add_option("--snapshots", dso.snapshots,
                                        "comma-separated snapshot times (default: 10 uniform)");
  data_cmd->add_option("--basis", dso.basis_path, "attach forcing coefficients (heat_forced)");
  auto* do_out = data_cmd->add_option("-o,--output", dso.out, "output dataset file");
  data_cmd->add_option("--config", config_path, "RunConfig JSON file");

  TrainOpts to;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit the branch network to a dataset");
  auto* tr_data = train_cmd->add_option("--data", to.data_path, "input dataset file");
  auto* tr_basis = train_cmd->add_option("--basis", to.basis_path, "input basis file");
  auto* tr_mesh = train_cmd->add_option(
      "--mesh", to.mesh_path, "mesh file, needed only to project missing forcing coefficients");
  auto* tr_lr = train_cmd->add_option("--lr", to.cfg.learning_rate, "Adam learning rate");
  auto* tr_it = train_cmd->add_option("--iterations", to.cfg.iterations, "Adam iterations");
  auto* tr_bs = train_cmd->add_option("--batch", to.cfg.batch_size, "batch size");
  auto* tr_seed = train_cmd->add_option("--seed", to.cfg.seed, "init, split, and batch seed");
  auto* tr_frac = train_cmd->add_option("--train-fraction", to.cfg.train_fraction,
                                        "fraction of samples used for training");
  auto* tr_in = train_cmd->add_option("--input-norm", to.input_norm, "zscore or identity")
                    ->check(CLI::IsMember({"zscore", "identity"}));
  auto* tr_out_n = train_cmd->add_option("--output-norm", to.output_norm, "zscore or identity")
                       ->check(CLI::IsMember({"zscore", "identity"}));
  auto* tr_out = train_cmd->add_option("-o,--output", to.out, "output model file");
  auto* tr_hist = train_cmd->add_option("--history", to.history, "loss history CSV");
  train_cmd->add_flag("--json", to.json, "machine-readable summary on stdout");
  train_cmd->add_option("--config", config_path, "RunConfig JSON file");

  EvalOpts evo;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Held-out error report for a trained model");
  auto* ev_model = eval_cmd->add_option("--model", evo.model_path, "input model file");
  auto* ev_data = eval_cmd->add_option("--data", evo.data_path, "input dataset file");
  auto* ev_basis = eval_cmd->add_option("--basis", evo.basis_path, "input basis file");
  auto* ev_mesh = eval_cmd->add_option("--mesh", evo.mesh_path, "input mesh file");
  auto* ev_seed =
      eval_cmd->add_option("--seed", evo.seed, "split seed (default: recorded in the model)");
  auto* ev_frac = eval_cmd->add_option("--train-fraction", evo.train_fraction,
                                       "train fraction (default: recorded in the model)");
  auto* ev_rep = eval_cmd->add_option("--report", evo.report, "error report CSV");
  eval_cmd->add_flag("--json", evo.json, "machine-readable report on stdout");
  eval_cmd->add_option("--config", config_path, "RunConfig JSON file");

  PredictOpts po;
  CLI::App* pred_cmd = app.add_subcommand("predict", "Evaluate a trained model at query points");
  pred_cmd->add_option("--model", po.model_path, "input model file");
  pred_cmd->add_option("--basis", po.basis_path, "input basis file");
  pred_cmd->add_option("--mesh", po.mesh_path, "input mesh file");
  pred_cmd->add_option("--data", po.data_path, "dataset supplying the sensor sample");
  pred_cmd->add_option("--sample", po.sample, "sample index into --data");
  pred_cmd->add_option("--input", po.input_path, "sensor field file (alternative to --data)");
  pred_cmd->add_option("--points", po.points, "query points CSV: x[,y[,z]][,t]");
  auto* po_t = pred_cmd->add_option("--t", po.t, "evaluation time for heat models");
  pred_cmd->add_option("-o,--output", po.out, "predicted values CSV (default: stdout)");
  pred_cmd->add_option("--export-vtk", po.vtk, "write the nodal prediction as a VTK file");

  CLI::App* study_cmd = app.add_subcommand("study", "Evaluation protocols");
  study_cmd->require_subcommand(1);

  ResolutionOpts ro;
  CLI::App* res_cmd =
      study_cmd->add_subcommand("resolution", "One model evaluated on denser query grids");
  auto* rs_model = res_cmd->add_option("--model", ro.model_path, "input model file");
  auto* rs_data = res_cmd->add_option("--data", ro.data_path, "input dataset file");
  auto* rs_basis = res_cmd->add_option("--basis", ro.basis_path, "input basis file");
  auto* rs_mesh = res_cmd->add_option("--mesh", ro.mesh_path, "input mesh file");
  res_cmd->add_option("--factors", ro.factors, "comma-separated densification factors");
  auto* rs_seed =
      res_cmd->add_option("--seed", ro.seed, "split seed (default: recorded in the model)");
  auto* rs_frac = res_cmd->add_option("--train-fraction", ro.train_fraction,
                                      "train fraction (default: recorded in the model)");
  auto* rs_rep = res_cmd->add_option("--report", ro.report, "error report CSV");
  res_cmd->add_flag("--json", ro.json, "machine-readable report on stdout");
  res_cmd->add_option("--config", config_path, "RunConfig JSON file");

  ModesOpts mso;
  CLI::App* modes_cmd =
      study_cmd->add_subcommand("modes", "Retrain at several mode counts and compare");
  auto* ms_mesh = modes_cmd->add_option("--mesh", mso.mesh_path, "input mesh file");
  auto* ms_data = modes_cmd->add_option("--data", mso.data_path, "input dataset file");
  modes_cmd->add_option("--m-values", mso.m_values, "comma-separated mode counts");
  auto* ms_lr = modes_cmd->add_option("--lr", mso.cfg.learning_rate, "Adam learning rate");
  auto* ms_it = modes_cmd->add_option("--iterations", mso.cfg.iterations, "Adam iterations");
  auto* ms_bs = modes_cmd->add_option("--batch", mso.cfg.batch_size, "batch size");
  auto* ms_seed = modes_cmd->add_option("--seed", mso.cfg.seed, "init, split, and batch seed");
  auto* ms_frac = modes_cmd->add_option("--train-fraction", mso.cfg.train_fraction,
                                        "fraction of samples used for training");
  auto* ms_rep = modes_cmd->add_option("--report", mso.report, "error report CSV");
  modes_cmd->add_flag("--json", mso.json, "machine-readable report on stdout");
  modes_cmd->add_option("--config", config_path, "RunConfig JSON file");

  ApplyGOpts ao;
  CLI::App* apply_cmd =
      app.add_subcommand("apply-g", "Apply a spectral function of the Laplacian to a field");
  apply_cmd->add_option("--basis", ao.basis_path, "input basis file");
  apply_cmd->add_option("--mesh", ao.mesh_path, "input mesh file");
  apply_cmd->add_option("--input", ao.input_path, "input field file");
  apply_cmd->add_option("--function", ao.function, "descriptor: pow:<a>, exp-scale:<a>, identity");
  apply_cmd->add_option("-o,--output", ao.out, "output field file");
  apply_cmd->add_option("--export-vtk", ao.vtk, "write input and result as a VTK file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (*mesh_cmd) {
      merge(mo_geom, mo.geometry, cfg.geometry_kind);
      merge(mo_n, mo.n, cfg.n);
      merge(mo_res, mo.resolution, cfg.resolution);
      merge(mo_path, mo.msh_path, cfg.geometry_path);
      merge(mo_fins, mo.fins.fin_count, cfg.fin_count);
      merge(mo_fw, mo.fins.fin_width, cfg.fin_width);
      merge(mo_fl, mo.fins.fin_length, cfg.fin_length);
      merge(mo_bw, mo.fins.base_width, cfg.base_width);
      merge(mo_bh, mo.fins.base_height, cfg.base_height);
      merge_path(mo_out, mo.out, cfg, "mesh");
      return cmd_mesh(mo);
    }
    if (*eigen_cmd) {
      merge_path(eo_mesh, eo.mesh_path, cfg, "mesh");
      merge(eo_modes, eo.modes, cfg.modes);
      merge_path(eo_out, eo.out, cfg, "basis");
      return cmd_eigen(eo);
    }
    if (*data_cmd) {
      merge_path(do_mesh, dso.mesh_path, cfg, "mesh");
      merge(do_problem, dso.problem, cfg.problem);
      merge(do_s2, dso.grf.sigma2, cfg.sigma2);
      merge(do_ell, dso.grf.length_scale, cfg.length_scale);
      merge(do_waves, dso.grf.n_modes, cfg.n_waves);
      merge(do_seed, dso.grf.seed, cfg.grf_seed);
      merge(do_diff, dso.ps.diffusivity, cfg.diffusivity);
      merge(do_tf, dso.ps.t_final, cfg.t_final);
      merge(do_dt, dso.ps.dt, cfg.dt);
      if (do_snaps->count() == 0 && cfg.snapshot_times) {
        std::string joined;
        for (double t : *cfg.snapshot_times)
          joined += (joined.empty() ? "" : ",") + fmt17(t);
        dso.snapshots = joined;
      }
      // paths.basis is not merged here: attaching forcing coefficients at
      // data time is an explicit request, not a side effect of a full config.
      merge_path(do_out, dso.out, cfg, "dataset");
      return cmd_data(dso);
    }
    if (*train_cmd) {
      merge_path(tr_data, to.data_path, cfg, "dataset");
      merge_path(tr_basis, to.basis_path, cfg, "basis");
      merge_path(tr_mesh, to.mesh_path, cfg, "mesh");
      merge(tr_lr, to.cfg.learning_rate, cfg.learning_rate);
      merge(tr_it, to.cfg.iterations, cfg.iterations);
      merge(tr_bs, to.cfg.batch_size, cfg.batch_size);
      merge(tr_seed, to.cfg.seed, cfg.train_seed);
      merge(tr_frac, to.cfg.train_fraction, cfg.train_fraction);
      merge(tr_in, to.input_norm, cfg.input_norm);
      merge(tr_out_n, to.output_norm, cfg.output_norm);
      merge_path(tr_out, to.out, cfg, "model");
      merge_path(tr_hist, to.history, cfg, "history");
      return cmd_train(to);
    }
    if (*eval_cmd) {
      merge_path(ev_model, evo.model_path, cfg, "model");
      merge_path(ev_data, evo.data_path, cfg, "dataset");
      merge_path(ev_basis, evo.basis_path, cfg, "basis");
      merge_path(ev_mesh, evo.mesh_path, cfg, "mesh");
      merge(ev_seed, evo.seed, cfg.train_seed);
      merge(ev_frac, evo.train_fraction, cfg.train_fraction);
      merge_path(ev_rep, evo.report, cfg, "report");
      return cmd_eval(evo);
    }
    if (*pred_cmd) {
      po.has_t = po_t->count() > 0;
      return cmd_predict(po);
    }
    if (*study_cmd && *res_cmd) {
      merge_path(rs_model, ro.model_path, cfg, "model");
      merge_path(rs_data, ro.data_path, cfg, "dataset");
      merge_path(rs_basis, ro.basis_path, cfg, "basis");
      merge_path(rs_mesh, ro.mesh_path, cfg, "mesh");
      merge(rs_seed, ro.seed, cfg.train_seed);
      merge(rs_frac, ro.train_fraction, cfg.train_fraction);
      merge_path(rs_rep, ro.report, cfg, "report");
      return cmd_study_resolution(ro);
    }
    if (*study_cmd && *modes_cmd) {
      merge_path(ms_mesh, mso.mesh_path, cfg, "mesh");
      merge_path(ms_data, mso.data_path, cfg, "dataset");
      merge(ms_lr, mso.cfg.learning_rate, cfg.learning_rate);
      merge(ms_it, mso.cfg.iterations, cfg.iterations);
      merge(ms_bs, mso.cfg.batch_size, cfg.batch_size);
      merge(ms_seed, mso.cfg.seed, cfg.train_seed);
      merge(ms_frac, mso.cfg.train_fraction, cfg.train_fraction);
      merge_path(ms_rep, mso.report, cfg, "report");
      return cmd_study_modes(mso);
    }
    if (*apply_cmd) return cmd_apply_g(ao);
    return 2;
  } catch (const HashMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const NotConverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InsufficientDofs& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InvalidGeometry& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateElement& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace feen::cli
