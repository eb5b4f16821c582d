#ifndef COPULA_FORGE_COPULA_HAC_HPP
#define COPULA_FORGE_COPULA_HAC_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "copula_forge/generator.hpp"
#include "copula_forge/latent_net.hpp"
#include "copula_forge/matrix.hpp"

namespace copula_forge {

/// Trainable compound Poisson subordinator: drift exp(mu_raw), jump intensity
/// exp(beta_raw), jump sizes drawn from `jump_net`.
struct SubordinatorSpec {
  double mu_raw = 0.0;
  double beta_raw = 0.0;
  GeneratorNet jump_net;

  double mu() const;
  double beta() const;

  friend bool operator==(const SubordinatorSpec&, const SubordinatorSpec&) = default;
};

/// Compound Poisson subordinator with a frozen empirical jump law, giving the
/// Laplace exponent psi(x) = mu x + beta (1 - phi_J(x)).
class Subordinator {
 public:
  Subordinator(double mu, double beta, EmpiricalGenerator jumps);
  /// Draws `latent_count` jump sizes from the spec's network.
  static Subordinator freeze(const SubordinatorSpec& spec, std::size_t latent_count, Rng& rng);

  double mu() const { return mu_; }
  double beta() const { return beta_; }
  const EmpiricalGenerator& jumps() const { return jumps_; }

  double psi(double x) const;
  /// psi'(x) = mu + beta E[J e^{-Jx}], psi^(k)(x) = -beta phi_J^(k)(x) for k >= 2.
  double psi_deriv(int k, double x) const;
  /// Solves psi(y) = a; psi is increasing and concave so Newton from 0 is monotone.
  double psi_inv(double a) const;

  /// Lambda(t) = mu t + sum of Poisson(beta t) jumps taken from the frozen set.
  double sample(double t, Rng& rng) const;

 private:
  double mu_;
  double beta_;
  EmpiricalGenerator jumps_;
};

/// Lambda(t) with jump sizes drawn fresh from the spec's network.
double sample_cpp(const SubordinatorSpec& spec, double t, Rng& rng);

struct HacChild {
  Subordinator sub;
  std::vector<int> vars;  // columns of the full vector that belong to this child
};

/// Two-level hierarchical Archimedean copula
///   C(u) = C_0(C_1(u_1), ..., C_J(u_J)),  phi_j = phi_0 o psi_j.
class HacModel {
 public:
  /// Children's variable lists must partition {0, ..., d-1}; J >= 2.
  HacModel(Generator outer, std::vector<HacChild> children);

  static constexpr int kMaxOrder = 8;

  const Generator& outer() const { return outer_; }
  const std::vector<HacChild>& children() const { return children_; }
  std::size_t child_count() const { return children_.size(); }
  int dim() const { return dim_; }

  double inner_phi(std::size_t j, double x) const;
  /// Faa di Bruno: sum_i phi_0^(i)(psi(x)) B_{k,i}(psi'(x), ..., psi^(k-i+1)(x)).
  double inner_phi_deriv(std::size_t j, int k, double x) const;
  double inner_phi_inv(std::size_t j, double u) const;

  double cdf(std::span<const double> u) const;
  /// Archimedean cdf of child j at its own block u_j.
  double child_cdf(std::size_t j, std::span<const double> block) const;
  double child_log_density(std::size_t j, std::span<const double> block) const;

  /// Per row: M from the outer latent, Lambda_j(M) per child, then
  /// U_{j,i} = phi_j(E_{j,i} / Lambda_j(M)).
  Matrix sample(std::size_t n, std::uint64_t seed) const;

 private:
  Generator outer_;
  std::vector<HacChild> children_;
  int dim_ = 0;
};

/// Parses "2,2" into consecutive blocks {0,1}, {2,3}.
std::vector<std::vector<int>> consecutive_partition(std::span<const int> sizes);

}  // namespace copula_forge

#endif  // COPULA_FORGE_COPULA_HAC_HPP
