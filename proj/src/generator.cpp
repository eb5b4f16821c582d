#include "copula_forge/generator.hpp"

namespace copula_forge {

double Generator::phi(double x) const {
  return std::visit([&](const auto& g) { return g.phi(x); }, impl_);
}

double Generator::phi_inv(double u, double tol) const {
  if (is_empirical()) return empirical().inverse(u, tol);
  return parametric().phi_inv(u);
}

double Generator::deriv(int k, double x) const {
  if (is_empirical()) return empirical().deriv(k, x);
  return parametric().phi_deriv(k, x);
}

double Generator::log_abs_deriv(int k, double x) const {
  return std::visit([&](const auto& g) { return g.log_abs_deriv(k, x); }, impl_);
}

double Generator::sample_latent(Rng& rng) const {
  if (is_empirical()) {
    const auto m = empirical().samples();
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    return m[pick(rng)];
  }
  return parametric().sample_latent(rng);
}

}  // namespace copula_forge
