#include "feen/grf.hpp"

#include <cmath>

#include "feen/errors.hpp"
#include "feen/rng.hpp"

namespace feen::grf {

namespace {

void validate(const GrfSpec& spec) {
  if (!(spec.sigma2 > 0.0)) throw DomainError("grf variance must be positive");
  if (!(spec.length_scale > 0.0)) throw DomainError("grf length scale must be positive");
  if (spec.n_modes < 1) throw DomainError("grf needs at least one mode");
}

}  // namespace

GrfRealization realize(const GrfSpec& spec, std::uint64_t sample_index, int dim,
                       std::uint64_t stream) {
  validate(spec);
  if (dim < 1 || dim > 3) throw DomainError("grf dimension must be 1, 2, or 3");

  const double wave_std = std::sqrt(M_PI / 2.0) / spec.length_scale;
  GrfRealization r;
  r.z1.resize(spec.n_modes);
  r.z2.resize(spec.n_modes);
  r.wave.resize(spec.n_modes, dim);
  for (int m = 0; m < spec.n_modes; ++m) {
    const auto [a, b] = rng::normal_pair(spec.seed, sample_index,
                                         static_cast<std::uint64_t>(m), stream * 16);
    r.z1(m) = a;
    r.z2(m) = b;
    for (int d = 0; d < dim; ++d)
      r.wave(m, d) = wave_std * rng::normal(spec.seed, sample_index,
                                            static_cast<std::uint64_t>(m),
                                            stream * 16 + 1 + static_cast<std::uint64_t>(d));
  }
  return r;
}

Eigen::VectorXd sample_field(const GrfSpec& spec, const GrfRealization& r,
                             const Eigen::MatrixXd& points) {
  validate(spec);
  if (points.cols() != r.wave.cols()) throw ShapeMismatch("point/wave dimension mismatch");
  const double amp = std::sqrt(spec.sigma2 / r.wave.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.rows());
  for (int m = 0; m < r.wave.rows(); ++m) {
    const Eigen::VectorXd phase = points * r.wave.row(m).transpose();
    for (int q = 0; q < out.size(); ++q)
      out(q) += r.z1(m) * std::cos(phase(q)) + r.z2(m) * std::sin(phase(q));
  }
  return amp * out;
}

Eigen::VectorXd sample_field(const GrfSpec& spec, std::uint64_t sample_index,
                             const Eigen::MatrixXd& points, std::uint64_t stream) {
  return sample_field(spec, realize(spec, sample_index, static_cast<int>(points.cols()), stream),
                      points);
}

}  // namespace feen::grf
