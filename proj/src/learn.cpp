#include "feen/learn.hpp"

#include <cmath>

#include "feen/container.hpp"
#include "feen/errors.hpp"
#include "feen/rng.hpp"

namespace feen::learn {

namespace {

constexpr std::uint64_t kInitSlot = 0x17;
constexpr std::uint64_t kSplitSlot = 0x29;
constexpr std::uint64_t kBatchSlot = 0x3D;

// Maps a 64-bit word onto [0, n); bias is below n / 2^64.
int draw_index(std::uint64_t word, int n) {
  return static_cast<int>(
      (static_cast<unsigned __int128>(word) * static_cast<unsigned>(n)) >> 64);
}

}  // namespace

Normalizer Normalizer::fit(const Eigen::MatrixXd& rows, Mode mode) {
  Normalizer n;
  n.mode = mode;
  if (mode == Mode::identity) return n;
  if (rows.rows() == 0) throw ShapeMismatch("cannot fit statistics to an empty matrix");
  n.mean = rows.colwise().mean();
  const Eigen::VectorXd var =
      (rows.rowwise() - n.mean.transpose()).colwise().squaredNorm().transpose() /
      static_cast<double>(rows.rows());
  n.std = var.cwiseSqrt().cwiseMax(1e-12);
  return n;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& x) const {
  if (mode == Mode::identity) return x;
  if (x.size() != mean.size()) throw ShapeMismatch("normalizer size mismatch");
  return (x - mean).cwiseQuotient(std);
}

Eigen::VectorXd Normalizer::invert(const Eigen::VectorXd& x) const {
  if (mode == Mode::identity) return x;
  if (x.size() != mean.size()) throw ShapeMismatch("normalizer size mismatch");
  return x.cwiseProduct(std) + mean;
}

void validate(const TrainConfig& cfg) {
  if (cfg.learning_rate < 0.0) throw DomainError("learning rate must be nonnegative");
  if (cfg.iterations < 0) throw DomainError("iteration count must be nonnegative");
  if (cfg.batch_size < 1) throw DomainError("batch size must be at least 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw DomainError("train fraction must lie in (0, 1)");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw DomainError("adam betas must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) throw DomainError("adam epsilon must be positive");
}

spectral::ReconstructionRule default_rule(const sim::Dataset& data) {
  spectral::ReconstructionRule rule;
  switch (data.problem) {
    case sim::Problem::poisson: rule.variant = spectral::Variant::poisson_scaled; break;
    case sim::Problem::heat_homogeneous: rule.variant = spectral::Variant::heat_decay; break;
    case sim::Problem::heat_forced: rule.variant = spectral::Variant::heat_forced_ode; break;
  }
  rule.diffusivity = data.diffusivity;
  return rule;
}

BranchModel init_model(int p, int m, const spectral::ReconstructionRule& rule,
                       std::uint64_t seed) {
  if (p < 1 || m < 1) throw ShapeMismatch("model needs at least one sensor and one mode");
  BranchModel model;
  model.rule = rule;
  model.weights.resize(m, p);
  const double scale = std::sqrt(2.0 / (p + m));
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < p; ++j)
      model.weights(k, j) =
          scale * rng::normal(seed, static_cast<std::uint64_t>(k),
                              static_cast<std::uint64_t>(j), kInitSlot);
  model.bias = Eigen::VectorXd::Zero(m);
  return model;
}

Eigen::VectorXd forward(const BranchModel& model, const Eigen::VectorXd& sensors,
                        const std::optional<Eigen::VectorXd>& f_coeffs, std::optional<double> t,
                        const Eigen::MatrixXd& query_eval) {
  if (sensors.size() != model.p()) throw ShapeMismatch("sensor count mismatch");
  if (model.eigenvalues.size() != model.m())
    throw ShapeMismatch("model is not bound to a basis");
  const Eigen::VectorXd coords = model.weights * model.input_norm.apply(sensors) + model.bias;
  // Models trained against z-scored targets reconstruct the normalized field;
  // inverting the statistics requires the query rows to be the fitted nodes.
  return model.output_norm.invert(
      spectral::reconstruct(model.rule, model.eigenvalues, coords, f_coeffs, t, query_eval));
}

// Sensor values are z-scored; targets stay in physical units so the spectral
// layers keep their exact meaning (decay factors, forced offsets, boundary
// zeros).  Z-scored targets remain available through the explicit overload.
TrainingSet::TrainingSet(const sim::Dataset& data, const eig::EigenBasis& basis,
                         const spectral::ReconstructionRule& rule, const TrainConfig& cfg)
    : TrainingSet(data, basis, rule, cfg, Normalizer::Mode::zscore,
                  Normalizer::Mode::identity) {}

TrainingSet::TrainingSet(const sim::Dataset& data, const eig::EigenBasis& basis,
                         const spectral::ReconstructionRule& rule, const TrainConfig& cfg,
                         Normalizer::Mode input_mode, Normalizer::Mode output_mode)
    : rule_(rule) {
  build(data, basis, cfg, input_mode, output_mode);
}

void TrainingSet::build(const sim::Dataset& data, const eig::EigenBasis& basis,
                        const TrainConfig& cfg, Normalizer::Mode input_mode,
                        Normalizer::Mode output_mode) {
  validate(cfg);
  if (data.n_samples() < 1) throw ShapeMismatch("dataset is empty");
  if (data.mesh_id != basis.mesh_id) throw HashMismatch("dataset and basis meshes differ");
  const bool forced = rule_.variant == spectral::Variant::heat_forced_ode;
  if (forced) {
    if (data.f_coeffs.rows() != data.n_samples() || data.f_coeffs.cols() != basis.m())
      throw ShapeMismatch("forced training needs per-sample forcing coefficients");
    if (data.f_basis_hash != eig::fingerprint(basis))
      throw HashMismatch("forcing coefficients belong to a different basis");
  }

  const int n_samples = data.n_samples();
  const int n_snaps = data.n_snapshots();
  const int m = basis.m();
  n_nodes_ = data.n_nodes();
  eigenvalues_ = basis.eigenvalues;
  basis_hash_ = eig::fingerprint(basis);
  mesh_id_ = basis.mesh_id;
  split_seed_ = cfg.seed;
  train_fraction_ = cfg.train_fraction;

  pairs_.reserve(static_cast<size_t>(n_samples) * static_cast<size_t>(n_snaps));
  for (int s = 0; s < n_samples; ++s)
    for (int j = 0; j < n_snaps; ++j) pairs_.push_back({s, j});

  // Seeded shuffle of the samples; held-out trajectories are fully unseen.
  std::vector<int> order(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) order[static_cast<size_t>(i)] = i;
  for (int i = n_samples - 1; i > 0; --i) {
    const int j = draw_index(rng::bits(cfg.seed, static_cast<std::uint64_t>(i), 0, kSplitSlot),
                             i + 1);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }
  int n_train = static_cast<int>(cfg.train_fraction * n_samples);
  if (n_samples >= 2) {
    n_train = std::max(1, std::min(n_train, n_samples - 1));
  } else {
    n_train = 1;
  }
  std::vector<char> in_train(static_cast<size_t>(n_samples), 0);
  for (int i = 0; i < n_train; ++i) in_train[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
  for (int id = 0; id < n_pairs(); ++id)
    (in_train[static_cast<size_t>(pairs_[static_cast<size_t>(id)].sample)] ? train_ids_
                                                                           : test_ids_)
        .push_back(id);

  // Normalization statistics come from the training portion only.
  Eigen::MatrixXd train_inputs(n_train, data.branch_input(0).size());
  for (int i = 0; i < n_train; ++i)
    train_inputs.row(i) = data.branch_input(order[static_cast<size_t>(i)]).transpose();
  input_norm_ = Normalizer::fit(train_inputs, input_mode);

  if (output_mode == Normalizer::Mode::zscore) {
    Eigen::MatrixXd train_targets(static_cast<int>(train_ids_.size()), n_nodes_);
    for (size_t r = 0; r < train_ids_.size(); ++r) {
      const Pair pr = pairs_[static_cast<size_t>(train_ids_[r])];
      train_targets.row(static_cast<int>(r)) = data.output_at(pr.sample, pr.snapshot).transpose();
    }
    output_norm_ = Normalizer::fit(train_targets, output_mode);
  } else {
    output_norm_.mode = Normalizer::Mode::identity;
  }

  inputs_.resize(data.branch_input(0).size(), n_samples);
  for (int s = 0; s < n_samples; ++s) inputs_.col(s) = input_norm_.apply(data.branch_input(s));

  // Everything static about the loss: with y the normalized target and
  // residual r = E c_eff + E q - y,
  //   ||r||^2 = c_eff^T G c_eff - 2 c_eff^T p + wsq,
  // where G = E^T E and p = E^T (y - E q).
  const Eigen::MatrixXd eval = eig::evaluate_at_nodes(basis);
  gram_ = eval.transpose() * eval;

  scales_.resize(m, n_snaps);
  std::optional<double> t;
  for (int j = 0; j < n_snaps; ++j) {
    if (!data.snapshot_times.empty()) t = data.snapshot_times[static_cast<size_t>(j)];
    scales_.col(j) = spectral::scale_factors(rule_, eigenvalues_, t);
  }

  proj_.resize(m, n_pairs());
  wsq_.resize(n_pairs());
  for (int id = 0; id < n_pairs(); ++id) {
    const Pair pr = pairs_[static_cast<size_t>(id)];
    Eigen::VectorXd target = output_norm_.apply(data.output_at(pr.sample, pr.snapshot));
    if (forced) {
      const Eigen::VectorXd q = spectral::offset_terms(
          rule_, eigenvalues_, Eigen::VectorXd(data.f_coeffs.row(pr.sample).transpose()),
          data.snapshot_times[static_cast<size_t>(pr.snapshot)]);
      target -= eval * q;
    }
    proj_.col(id) = eval.transpose() * target;
    wsq_(id) = target.squaredNorm();
  }
}

Eigen::VectorXd TrainingSet::input(int id) const {
  if (id < 0 || id >= n_pairs()) throw ShapeMismatch("pair id out of range");
  return inputs_.col(pairs_[static_cast<size_t>(id)].sample);
}

Eigen::MatrixXd TrainingSet::batch_coords(const BranchModel& model, const std::vector<int>& ids,
                                          Eigen::MatrixXd* x_batch) const {
  if (model.m() != n_modes() || model.p() != n_sensors())
    throw ShapeMismatch("model shape does not match the training set");
  if (ids.empty()) throw ShapeMismatch("empty batch");
  const int b = static_cast<int>(ids.size());
  Eigen::MatrixXd x(n_sensors(), b);
  for (int i = 0; i < b; ++i) {
    const int id = ids[static_cast<size_t>(i)];
    if (id < 0 || id >= n_pairs()) throw ShapeMismatch("pair id out of range");
    x.col(i) = inputs_.col(pairs_[static_cast<size_t>(id)].sample);
  }
  Eigen::MatrixXd c = model.weights * x;
  c.colwise() += model.bias;
  // scale per snapshot: c_eff = s .* c
  for (int i = 0; i < b; ++i)
    c.col(i) =
        c.col(i).cwiseProduct(scales_.col(pairs_[static_cast<size_t>(ids[static_cast<size_t>(i)])].snapshot));
  if (x_batch) *x_batch = std::move(x);
  return c;
}

TrainingSet::LossGrad TrainingSet::loss_and_grad(const BranchModel& model,
                                                 const std::vector<int>& ids) const {
  Eigen::MatrixXd x;
  const Eigen::MatrixXd c_eff = batch_coords(model, ids, &x);
  const int b = static_cast<int>(ids.size());
  const double denom = static_cast<double>(b) * static_cast<double>(n_nodes_);

  const Eigen::MatrixXd gc = gram_ * c_eff;
  double sum = 0.0;
  Eigen::MatrixXd dc(n_modes(), b);
  for (int i = 0; i < b; ++i) {
    const int id = ids[static_cast<size_t>(i)];
    const auto p = proj_.col(id);
    sum += c_eff.col(i).dot(gc.col(i)) - 2.0 * c_eff.col(i).dot(p) + wsq_(id);
    dc.col(i) = (2.0 / denom) *
                (gc.col(i) - p).cwiseProduct(
                    scales_.col(pairs_[static_cast<size_t>(id)].snapshot));
  }

  LossGrad out;
  out.mse = sum / denom;
  out.grad_w = dc * x.transpose();
  out.grad_b = dc.rowwise().sum();
  return out;
}

double TrainingSet::loss(const BranchModel& model, const std::vector<int>& ids) const {
  const Eigen::MatrixXd c_eff = batch_coords(model, ids, nullptr);
  const int b = static_cast<int>(ids.size());
  double sum = 0.0;
  const Eigen::MatrixXd gc = gram_ * c_eff;
  for (int i = 0; i < b; ++i) {
    const int id = ids[static_cast<size_t>(i)];
    sum += c_eff.col(i).dot(gc.col(i)) - 2.0 * c_eff.col(i).dot(proj_.col(id)) + wsq_(id);
  }
  return sum / (static_cast<double>(b) * static_cast<double>(n_nodes_));
}

TrainResult train(BranchModel model, const TrainingSet& set, const TrainConfig& cfg) {
  validate(cfg);
  if (model.m() != set.n_modes() || model.p() != set.n_sensors())
    throw ShapeMismatch("model shape does not match the training set");

  model.eigenvalues = set.eigenvalues();
  model.input_norm = set.input_normalizer();
  model.output_norm = set.output_normalizer();
  model.rule = set.rule();
  model.basis_hash = set.basis_hash();
  model.mesh_id = set.mesh_id();
  model.split_seed = set.split_seed();
  model.train_fraction = set.train_fraction();

  TrainResult result;
  result.initial_mse = set.loss(model, set.train_ids());

  Eigen::MatrixXd mw = Eigen::MatrixXd::Zero(model.m(), model.p());
  Eigen::MatrixXd vw = Eigen::MatrixXd::Zero(model.m(), model.p());
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(model.m());
  Eigen::VectorXd vb = Eigen::VectorXd::Zero(model.m());

  const int n_train = static_cast<int>(set.train_ids().size());
  std::vector<int> batch(static_cast<size_t>(cfg.batch_size));
  double beta1_t = 1.0, beta2_t = 1.0;

  for (long it = 1; it <= cfg.iterations; ++it) {
    for (int i = 0; i < cfg.batch_size; ++i)
      batch[static_cast<size_t>(i)] = set.train_ids()[static_cast<size_t>(draw_index(
          rng::bits(cfg.seed, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(i),
                    kBatchSlot),
          n_train))];

    const TrainingSet::LossGrad lg = set.loss_and_grad(model, batch);
    if (!std::isfinite(lg.mse)) throw NonFiniteLoss("training loss is not finite", it);

    beta1_t *= cfg.beta1;
    beta2_t *= cfg.beta2;
    const double corr1 = 1.0 - beta1_t;
    const double corr2 = 1.0 - beta2_t;

    mw = cfg.beta1 * mw + (1.0 - cfg.beta1) * lg.grad_w;
    vw = cfg.beta2 * vw.array().matrix() + (1.0 - cfg.beta2) * lg.grad_w.array().square().matrix();
    mb = cfg.beta1 * mb + (1.0 - cfg.beta1) * lg.grad_b;
    vb = cfg.beta2 * vb.array().matrix() + (1.0 - cfg.beta2) * lg.grad_b.array().square().matrix();

    model.weights.array() -=
        cfg.learning_rate * (mw.array() / corr1) / ((vw.array() / corr2).sqrt() + cfg.eps);
    model.bias.array() -=
        cfg.learning_rate * (mb.array() / corr1) / ((vb.array() / corr2).sqrt() + cfg.eps);

    if (it % 100 == 0 || it == cfg.iterations)
      result.history.emplace_back(it, set.loss(model, set.train_ids()));
  }

  result.final_mse = cfg.iterations > 0 ? set.loss(model, set.train_ids()) : result.initial_mse;
  result.model = std::move(model);
  return result;
}

TrainResult fit(const sim::Dataset& data, const eig::EigenBasis& basis, const TrainConfig& cfg) {
  const spectral::ReconstructionRule rule = default_rule(data);
  const TrainingSet set(data, basis, rule, cfg);
  BranchModel model = init_model(set.n_sensors(), set.n_modes(), rule, cfg.seed);
  return train(std::move(model), set, cfg);
}

}  // namespace feen::learn
