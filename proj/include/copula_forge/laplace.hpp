#ifndef COPULA_FORGE_LAPLACE_HPP
#define COPULA_FORGE_LAPLACE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace copula_forge {

inline constexpr double kNewtonTol = 1e-10;

struct InverseResult {
  double y = 0.0;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // |phi(y) - u|
};

/// Empirical Laplace transform of a frozen set of positive latent draws:
///   phi(x)     = 1/L sum_l exp(-m_l x)
///   phi^(k)(x) = 1/L sum_l (-m_l)^k exp(-m_l x)
/// Every derivative has sign (-1)^k exactly since each summand does.
class EmpiricalGenerator {
 public:
  /// Throws DomainError if `samples` is empty or holds a non-positive value.
  explicit EmpiricalGenerator(std::vector<double> samples);

  std::span<const double> samples() const { return m_; }
  std::size_t size() const { return m_.size(); }
  double mean() const { return mean_; }
  double min_sample() const { return min_; }

  double phi(double x) const;
  double deriv(int k, double x) const;

  /// log |phi^(k)(x)| by log-sum-exp; finite for any finite x.
  double log_abs_deriv(int k, double x) const;
  /// As log_abs_deriv, also writing the normalised summand weights
  /// w_l = m_l^k exp(-m_l x) / (L |phi^(k)(x)|) into `weights`.
  double log_abs_deriv(int k, double x, std::span<double> weights) const;

  /// phi^{-1}(u) by Newton's method on log phi, with a bisection fallback.
  /// Throws DomainError for u outside (0, 1] and SolverError on failure.
  double inverse(double u, double tol = kNewtonTol) const;
  InverseResult solve_inverse(double u, double tol = kNewtonTol) const;

  /// d phi^{-1}(u) / d m_l at y = phi^{-1}(u), by the implicit function theorem.
  std::vector<double> inverse_grad(double u, double y) const;

  /// d/dm_l of the l-th summand of phi^(k)(x).
  std::vector<double> sample_grads(int k, double x) const;

 private:
  std::vector<double> m_;
  std::vector<double> log_m_;
  double mean_ = 0.0;
  double min_ = 0.0;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_LAPLACE_HPP
