#ifndef COPULA_FORGE_PARAMETRIC_HPP
#define COPULA_FORGE_PARAMETRIC_HPP

#include <string>
#include <string_view>

#include "copula_forge/rng.hpp"

namespace copula_forge {

enum class Family { Clayton, Frank, Joe, Gumbel, Nelsen12, Nelsen19 };

std::string to_string(Family f);
/// Accepts lower-case family names; "12" and "19" alias the Nelsen families.
Family parse_family(std::string_view name);

/// Closed-form Archimedean generator phi(x) = E[exp(-M x)] of a one-parameter
/// family. Nelsen12 uses phi(x) = 1 / (1 + x^(1/theta)) and Nelsen19 uses
/// phi(x) = theta / log(x + e^theta).
class ParametricGenerator {
 public:
  /// Throws DomainError when theta is outside the family's admissible range.
  ParametricGenerator(Family family, double theta);

  Family family() const { return family_; }
  double theta() const { return theta_; }

  double phi(double x) const;
  double phi_inv(double u) const;

  /// k-th derivative. Any k for Clayton, Frank and Joe; k <= kMaxComposedOrder
  /// for the other families.
  double phi_deriv(int k, double x) const;
  /// log |phi^(k)(x)|, evaluated in log space where the family allows it.
  double log_abs_deriv(int k, double x) const;

  /// Draw of the latent M whose Laplace transform is phi. Clayton -> Gamma,
  /// Frank -> logarithmic, Joe -> Sibuya, Gumbel -> positive stable.
  double sample_latent(Rng& rng) const;
  bool has_latent_sampler() const;

  /// Kendall's tau where a closed form exists (Clayton, Gumbel); NaN otherwise.
  double kendall_tau() const;

  static constexpr int kMaxComposedOrder = 8;

  friend bool operator==(const ParametricGenerator&, const ParametricGenerator&) = default;

 private:
  Family family_;
  double theta_;
};

double sample_gamma(double shape, Rng& rng);
double sample_logarithmic(double p, Rng& rng);
double sample_sibuya(double alpha, Rng& rng);
/// Positive alpha-stable variate with Laplace transform exp(-x^alpha).
double sample_positive_stable(double alpha, Rng& rng);
/// Exponentially tilted stable: Laplace transform exp(-t((1 + x)^alpha - 1)).
double sample_tilted_stable(double alpha, double t, Rng& rng);

}  // namespace copula_forge

#endif  // COPULA_FORGE_PARAMETRIC_HPP
