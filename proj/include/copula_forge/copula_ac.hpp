#ifndef COPULA_FORGE_COPULA_AC_HPP
#define COPULA_FORGE_COPULA_AC_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include "copula_forge/generator.hpp"
#include "copula_forge/latent_net.hpp"
#include "copula_forge/matrix.hpp"

namespace copula_forge {

/// Archimedean copula C(u) = phi(phi^{-1}(u_1) + ... + phi^{-1}(u_d)).
class AcModel {
 public:
  AcModel(Generator gen, int dim);

  const Generator& generator() const { return gen_; }
  int dim() const { return dim_; }

  /// Throws DomainError if any coordinate lies outside [0, 1].
  double cdf(std::span<const double> u) const;

  /// log c(u) = log|phi^(d)(s)| - sum_i log|phi'(phi^{-1}(u_i))|, s = sum phi^{-1}(u_i).
  /// The sign (-1)^d cancels between numerator and denominator. Throws
  /// BoundaryError unless every u_i lies in (0, 1).
  double log_density(std::span<const double> u) const;

  /// Marshall-Olkin draws U_j = phi(E_j / M). Row r uses its own random
  /// stream derived from (seed, r).
  Matrix sample(std::size_t n, std::uint64_t seed) const;

 private:
  Generator gen_;
  int dim_;
};

/// How the latent M of each sampled row is chosen for a generative model.
enum class LatentDraw {
  /// M is drawn from the same L samples that define the transform, making the
  /// draws exact for the copula that cdf/log_density evaluate.
  FromTransformSet,
  /// M = G(eps) with a fresh eps, independent of the transform samples.
  Independent,
};

/// Samples a generative Archimedean copula: L fresh draws of the net define
/// the empirical transform, then each row follows the Marshall-Olkin recipe.
Matrix sample_generative(const GeneratorNet& net, int dim, std::size_t n, std::size_t latent_count,
                         std::uint64_t seed, LatentDraw draw = LatentDraw::FromTransformSet);

/// Clip each coordinate to [eps, 1 - eps].
void clip_to_interior(std::span<double> u, double eps = 1e-9);

}  // namespace copula_forge

#endif  // COPULA_FORGE_COPULA_AC_HPP
