#ifndef COPULA_FORGE_GENERATOR_HPP
#define COPULA_FORGE_GENERATOR_HPP

#include <variant>

#include "copula_forge/laplace.hpp"
#include "copula_forge/parametric.hpp"
#include "copula_forge/rng.hpp"

namespace copula_forge {

/// Either an empirical (frozen latent set) or a closed-form generator, with a
/// uniform phi / phi^{-1} / phi^(k) interface.
class Generator {
 public:
  Generator(EmpiricalGenerator g) : impl_(std::move(g)) {}  // NOLINT(google-explicit-constructor)
  Generator(ParametricGenerator g) : impl_(g) {}            // NOLINT(google-explicit-constructor)

  double phi(double x) const;
  double phi_inv(double u, double tol = kNewtonTol) const;
  double deriv(int k, double x) const;
  double log_abs_deriv(int k, double x) const;

  /// Latent draw M with E[exp(-M x)] = phi(x). For the empirical generator this
  /// is a uniform pick among its frozen samples, so draws are exact for the
  /// generator actually being evaluated.
  double sample_latent(Rng& rng) const;

  bool is_empirical() const { return std::holds_alternative<EmpiricalGenerator>(impl_); }
  const EmpiricalGenerator& empirical() const { return std::get<EmpiricalGenerator>(impl_); }
  const ParametricGenerator& parametric() const { return std::get<ParametricGenerator>(impl_); }

 private:
  std::variant<EmpiricalGenerator, ParametricGenerator> impl_;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_GENERATOR_HPP
