#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace feen::grf {

// Stationary Gaussian random field with squared-exponential covariance
//   Cov(x, y) = sigma2 * exp(-pi ||x - y||^2 / (4 length_scale^2)),
// synthesized by the randomization method: wave vectors drawn from the
// spectral density (i.i.d. normal components, std sqrt(pi/2)/length_scale)
// and amplitude pairs from the standard normal.
struct GrfSpec {
  double sigma2 = 15.0;
  double length_scale = 0.3;
  int n_modes = 512;
  std::uint64_t seed = 0;
};

struct GrfRealization {
  Eigen::VectorXd z1, z2;  // n_modes
  Eigen::MatrixXd wave;    // n_modes x dim
};

// Draws are keyed by (seed, stream, sample_index, mode), so fields are
// reproducible in any evaluation order and distinct streams are independent.
GrfRealization realize(const GrfSpec& spec, std::uint64_t sample_index, int dim,
                       std::uint64_t stream = 0);

Eigen::VectorXd sample_field(const GrfSpec& spec, const GrfRealization& r,
                             const Eigen::MatrixXd& points);

Eigen::VectorXd sample_field(const GrfSpec& spec, std::uint64_t sample_index,
                             const Eigen::MatrixXd& points, std::uint64_t stream = 0);

}  // namespace feen::grf
