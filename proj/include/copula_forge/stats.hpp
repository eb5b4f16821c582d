#ifndef COPULA_FORGE_STATS_HPP
#define COPULA_FORGE_STATS_HPP

#include <span>
#include <vector>

#include "copula_forge/matrix.hpp"

namespace copula_forge {

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against U(0,1).
double ks_uniform(std::span<const double> sample);
/// Asymptotic KS critical value at level alpha (0.01 or 0.05), with
/// Stephens' small-sample correction.
double ks_critical_value(std::size_t n, double alpha = 0.01);

/// 1-Wasserstein distance between two empirical distributions.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// C_N(p) = 1/N sum_i 1{data_i <= p componentwise}.
double empirical_copula(const Matrix& data, std::span<const double> p);

/// Cramer-von Mises distance 1/N sum_i (model_i - empirical_i)^2.
double cvm_distance(std::span<const double> model_values, std::span<const double> empirical_values);

double mean(std::span<const double> v);
double median(std::vector<double> v);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Means of consecutive non-overlapping blocks of length `block`.
std::vector<double> block_means(std::span<const double> v, std::size_t block);

}  // namespace copula_forge

#endif  // COPULA_FORGE_STATS_HPP
