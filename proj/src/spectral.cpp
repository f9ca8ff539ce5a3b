#include "feen/spectral.hpp"

#include <cmath>

#include "feen/errors.hpp"

namespace feen::spectral {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::poisson_scaled: return "poisson_scaled";
    case Variant::heat_decay: return "heat_decay";
    case Variant::heat_forced_ode: return "heat_forced_ode";
  }
  throw DomainError("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "poisson_scaled") return Variant::poisson_scaled;
  if (name == "heat_decay") return Variant::heat_decay;
  if (name == "heat_forced_ode") return Variant::heat_forced_ode;
  throw DomainError("unknown variant '" + name + "'");
}

Eigen::VectorXd scale_factors(const ReconstructionRule& rule,
                              const Eigen::VectorXd& eigenvalues, std::optional<double> t) {
  if (rule.variant == Variant::poisson_scaled)
    return eigenvalues.array().sqrt().inverse().matrix();
  if (!t) throw MissingTime("heat reconstruction needs a time");
  if (!(rule.diffusivity > 0.0)) throw DomainError("diffusivity must be positive");
  return (-rule.diffusivity * *t * eigenvalues.array()).exp().matrix();
}

Eigen::VectorXd offset_terms(const ReconstructionRule& rule, const Eigen::VectorXd& eigenvalues,
                             const std::optional<Eigen::VectorXd>& f_coeffs,
                             std::optional<double> t) {
  if (rule.variant != Variant::heat_forced_ode)
    return Eigen::VectorXd::Zero(eigenvalues.size());
  if (!t) throw MissingTime("heat reconstruction needs a time");
  if (!f_coeffs) throw ShapeMismatch("forced reconstruction needs forcing coefficients");
  if (f_coeffs->size() != eigenvalues.size())
    throw ShapeMismatch("forcing coefficient count mismatch");
  const Eigen::ArrayXd dl = rule.diffusivity * eigenvalues.array();
  return (f_coeffs->array() / dl * (1.0 - (-dl * *t).exp())).matrix();
}

Eigen::VectorXd effective_coords(const ReconstructionRule& rule,
                                 const Eigen::VectorXd& eigenvalues,
                                 const Eigen::VectorXd& coords,
                                 const std::optional<Eigen::VectorXd>& f_coeffs,
                                 std::optional<double> t) {
  if (coords.size() != eigenvalues.size()) throw ShapeMismatch("coordinate count mismatch");
  return coords.cwiseProduct(scale_factors(rule, eigenvalues, t)) +
         offset_terms(rule, eigenvalues, f_coeffs, t);
}

Eigen::VectorXd reconstruct(const ReconstructionRule& rule, const Eigen::VectorXd& eigenvalues,
                            const Eigen::VectorXd& coords,
                            const std::optional<Eigen::VectorXd>& f_coeffs,
                            std::optional<double> t, const Eigen::MatrixXd& basis_eval) {
  if (basis_eval.cols() != eigenvalues.size())
    throw ShapeMismatch("basis evaluation column count mismatch");
  return basis_eval * effective_coords(rule, eigenvalues, coords, f_coeffs, t);
}

Eigen::VectorXd project(const eig::EigenBasis& basis, const fem::SparseMatrix& mass_full,
                        const Eigen::VectorXd& u_full) {
  if (u_full.size() != basis.dofs.n_nodes()) throw ShapeMismatch("field size mismatch");
  const Eigen::VectorXd mu = fem::restrict_vector(mass_full.multiply(u_full), basis.dofs);
  return basis.modes.transpose() * mu;
}

eig::EigenBasis scaled_basis_poisson(const eig::EigenBasis& basis) {
  eig::EigenBasis scaled = basis;
  for (int k = 0; k < basis.m(); ++k)
    scaled.modes.col(k) /= std::sqrt(basis.eigenvalues(k));
  return scaled;
}

std::function<double(double)> parse_g(const std::string& descriptor) {
  auto parse_param = [&](size_t prefix_len) {
    const std::string body = descriptor.substr(prefix_len);
    try {
      size_t pos = 0;
      const double v = std::stod(body, &pos);
      if (pos != body.size()) throw std::invalid_argument(body);
      return v;
    } catch (const std::exception&) {
      throw ParseError("malformed spectral function parameter '" + body + "'", 0);
    }
  };
  if (descriptor == "identity") return [](double) { return 1.0; };
  if (descriptor.rfind("pow:", 0) == 0) {
    const double a = parse_param(4);
    return [a](double lambda) { return std::pow(lambda, a); };
  }
  if (descriptor.rfind("exp-scale:", 0) == 0) {
    const double a = parse_param(10);
    return [a](double lambda) { return std::exp(-a * lambda); };
  }
  throw ParseError("unknown spectral function '" + descriptor + "'", 0);
}

Eigen::VectorXd apply_spectral_function(const eig::EigenBasis& basis,
                                        const fem::SparseMatrix& mass_full,
                                        const std::function<double(double)>& g,
                                        const Eigen::VectorXd& u_full) {
  Eigen::VectorXd coords = project(basis, mass_full, u_full);
  for (int k = 0; k < coords.size(); ++k) {
    const double gk = g(basis.eigenvalues(k));
    if (!std::isfinite(gk))
      throw DomainError("spectral function is not finite at lambda = " +
                        std::to_string(basis.eigenvalues(k)));
    coords(k) *= gk;
  }
  Eigen::VectorXd interior = basis.modes * coords;
  return fem::extend_vector(interior, basis.dofs);
}

}  // namespace feen::spectral
