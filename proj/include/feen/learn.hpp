#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "feen/eig.hpp"
#include "feen/sim.hpp"
#include "feen/spectral.hpp"

namespace feen::learn {

// Per-sensor affine standardization.  Standard deviations are clamped at
// 1e-12 so constant sensors (boundary nodes) normalize to zero instead of
// dividing by zero.
struct Normalizer {
  enum class Mode { zscore, identity };
  Mode mode = Mode::identity;
  Eigen::VectorXd mean, std;  // empty in identity mode

  // Column statistics of an observations x sensors matrix.
  static Normalizer fit(const Eigen::MatrixXd& rows, Mode mode);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& x) const;
};

// Affine branch: spectral coordinates = weights * normalized sensors + bias.
// The reconstruction rule and hash bindings travel with the parameters so a
// persisted model can refuse mismatched bases.
struct BranchModel {
  Eigen::MatrixXd weights;     // n_modes x n_sensors
  Eigen::VectorXd bias;        // n_modes
  Eigen::VectorXd eigenvalues;  // copied from the bound basis at training time
  Normalizer input_norm, output_norm;
  spectral::ReconstructionRule rule;
  std::uint64_t basis_hash = 0;
  std::uint64_t mesh_id = 0;
  // Split provenance: evaluating held-out error on any other split would leak
  // training samples into the report.
  std::uint64_t split_seed = 0;
  double train_fraction = 0.9;

  int p() const { return static_cast<int>(weights.cols()); }
  int m() const { return static_cast<int>(weights.rows()); }
};

struct TrainConfig {
  double learning_rate = 4e-5;
  long iterations = 20000;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double train_fraction = 0.9;
};

void validate(const TrainConfig& cfg);

spectral::ReconstructionRule default_rule(const sim::Dataset& data);

// Weights drawn from Normal(0, 2/(p + m)), bias zero, seeded counter RNG.
BranchModel init_model(int p, int m, const spectral::ReconstructionRule& rule,
                       std::uint64_t seed);

// Predicted field at the rows of query_eval.  Heat variants need t; the
// forced variant needs the query's forcing coefficients.  A model trained
// against z-scored targets denormalizes through its stored statistics, which
// pins the query rows to the fitted nodes; identity-mode models evaluate on
// any point set.
Eigen::VectorXd forward(const BranchModel& model, const Eigen::VectorXd& sensors,
                        const std::optional<Eigen::VectorXd>& f_coeffs, std::optional<double> t,
                        const Eigen::MatrixXd& query_eval);

// Training examples are (sample, snapshot) pairs.  Targets pass through the
// output normalizer once at construction and the reconstruction is matched
// against them directly, so with z-scored targets the network fits the
// normalized field.  Everything the loss needs is folded into a Gram matrix
// and per-pair projections, so one loss evaluation never touches the node
// grid again.
class TrainingSet {
 public:
  struct Pair {
    int sample;
    int snapshot;
  };

  TrainingSet(const sim::Dataset& data, const eig::EigenBasis& basis,
              const spectral::ReconstructionRule& rule, const TrainConfig& cfg);
  TrainingSet(const sim::Dataset& data, const eig::EigenBasis& basis,
              const spectral::ReconstructionRule& rule, const TrainConfig& cfg,
              Normalizer::Mode input_mode, Normalizer::Mode output_mode);

  int n_sensors() const { return static_cast<int>(inputs_.rows()); }
  int n_modes() const { return static_cast<int>(gram_.rows()); }
  int n_nodes() const { return n_nodes_; }
  int n_pairs() const { return static_cast<int>(pairs_.size()); }
  Pair pair(int id) const { return pairs_[static_cast<size_t>(id)]; }
  const std::vector<int>& train_ids() const { return train_ids_; }
  const std::vector<int>& test_ids() const { return test_ids_; }
  const Normalizer& input_normalizer() const { return input_norm_; }
  const Normalizer& output_normalizer() const { return output_norm_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const spectral::ReconstructionRule& rule() const { return rule_; }
  std::uint64_t basis_hash() const { return basis_hash_; }
  std::uint64_t mesh_id() const { return mesh_id_; }
  std::uint64_t split_seed() const { return split_seed_; }
  double train_fraction() const { return train_fraction_; }

  // Normalized sensor column for a pair id.
  Eigen::VectorXd input(int id) const;

  struct LossGrad {
    double mse = 0.0;
    Eigen::MatrixXd grad_w;
    Eigen::VectorXd grad_b;
  };

  LossGrad loss_and_grad(const BranchModel& model, const std::vector<int>& ids) const;
  double loss(const BranchModel& model, const std::vector<int>& ids) const;

 private:
  void build(const sim::Dataset& data, const eig::EigenBasis& basis, const TrainConfig& cfg,
             Normalizer::Mode input_mode, Normalizer::Mode output_mode);
  Eigen::MatrixXd batch_coords(const BranchModel& model, const std::vector<int>& ids,
                               Eigen::MatrixXd* x_batch) const;

  spectral::ReconstructionRule rule_;
  Normalizer input_norm_, output_norm_;
  Eigen::MatrixXd inputs_;   // n_sensors x n_samples, normalized
  Eigen::MatrixXd gram_;     // n_modes x n_modes, E^T E
  Eigen::MatrixXd proj_;     // n_modes x n_pairs, E^T (y - E q), y normalized
  Eigen::VectorXd wsq_;      // n_pairs, ||y - E q||^2
  Eigen::MatrixXd scales_;   // n_modes x n_snapshots
  Eigen::VectorXd eigenvalues_;
  std::vector<Pair> pairs_;
  std::vector<int> train_ids_, test_ids_;
  int n_nodes_ = 0;
  std::uint64_t basis_hash_ = 0;
  std::uint64_t mesh_id_ = 0;
  std::uint64_t split_seed_ = 0;
  double train_fraction_ = 0.9;
};

struct TrainResult {
  BranchModel model;
  std::vector<std::pair<long, double>> history;  // (iteration, training-set mse)
  double initial_mse = 0.0;  // full training set, before the first update
  double final_mse = 0.0;    // full training set, after the last update
};

// Sequential Adam with bias correction; batches drawn uniformly with
// replacement from the training pairs by a counter RNG, so runs are
// bit-reproducible.  Throws NonFiniteLoss with the failing iteration.
TrainResult train(BranchModel model, const TrainingSet& set, const TrainConfig& cfg);

// init_model + train with the dataset's natural rule and normalizer modes.
TrainResult fit(const sim::Dataset& data, const eig::EigenBasis& basis, const TrainConfig& cfg);

}  // namespace feen::learn
