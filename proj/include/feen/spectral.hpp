#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

#include "feen/eig.hpp"
#include "feen/fem.hpp"

namespace feen::spectral {

// How spectral coordinates turn into the effective expansion coefficients:
//   poisson_scaled   c_eff = c ./ sqrt(lambda)
//   heat_decay       c_eff = c .* exp(-D lambda t)
//   heat_forced_ode  c_eff = c .* exp(-D lambda t)
//                          + f_k / (D lambda) .* (1 - exp(-D lambda t))
enum class Variant { poisson_scaled, heat_decay, heat_forced_ode };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ReconstructionRule {
  Variant variant = Variant::poisson_scaled;
  double diffusivity = 0.0;  // heat variants
};

// Per-mode multiplier applied to raw coordinates; heat variants need t.
Eigen::VectorXd scale_factors(const ReconstructionRule& rule,
                              const Eigen::VectorXd& eigenvalues, std::optional<double> t);

// Additive forced-response term; zero except for heat_forced_ode.
Eigen::VectorXd offset_terms(const ReconstructionRule& rule, const Eigen::VectorXd& eigenvalues,
                             const std::optional<Eigen::VectorXd>& f_coeffs,
                             std::optional<double> t);

Eigen::VectorXd effective_coords(const ReconstructionRule& rule,
                                 const Eigen::VectorXd& eigenvalues,
                                 const Eigen::VectorXd& coords,
                                 const std::optional<Eigen::VectorXd>& f_coeffs,
                                 std::optional<double> t);

// Field values at the rows of basis_eval (from evaluate_at_nodes/_at_points).
Eigen::VectorXd reconstruct(const ReconstructionRule& rule, const Eigen::VectorXd& eigenvalues,
                            const Eigen::VectorXd& coords,
                            const std::optional<Eigen::VectorXd>& f_coeffs,
                            std::optional<double> t, const Eigen::MatrixXd& basis_eval);

// Spectral coordinates of a nodal field: c_k = phi_k^T M u.
Eigen::VectorXd project(const eig::EigenBasis& basis, const fem::SparseMatrix& mass_full,
                        const Eigen::VectorXd& u_full);

// Basis with column k scaled by lambda_k^{-1/2}.
eig::EigenBasis scaled_basis_poisson(const eig::EigenBasis& basis);

// Descriptor mini-language: "pow:<a>", "exp-scale:<a>" (exp(-a lambda)),
// "identity".  Unknown descriptors raise ParseError.
std::function<double(double)> parse_g(const std::string& descriptor);

// g(L) u = sum g(lambda_k) <u, phi_k>_M phi_k, nodal in and out.
Eigen::VectorXd apply_spectral_function(const eig::EigenBasis& basis,
                                        const fem::SparseMatrix& mass_full,
                                        const std::function<double(double)>& g,
                                        const Eigen::VectorXd& u_full);

}  // namespace feen::spectral
