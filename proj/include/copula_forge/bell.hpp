#ifndef COPULA_FORGE_BELL_HPP
#define COPULA_FORGE_BELL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace copula_forge {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Table of partial (incomplete) Bell polynomials B_{n,k}(x_1, ..., x_{n-k+1})
/// for 0 <= k <= n <= order, built with the recurrence
///   B_{n,k} = sum_{i=1}^{n-k+1} C(n-1, i-1) x_i B_{n-i,k-1}.
/// `x[0]` holds x_1.
class BellTable {
 public:
  BellTable(std::span<const double> x, int order) : order_(order), b_((order + 1) * (order + 1), 0.0) {
    at(0, 0) = 1.0;
    for (int n = 1; n <= order; ++n) {
      for (int k = 1; k <= n; ++k) {
        double s = 0.0;
        for (int i = 1; i <= n - k + 1; ++i) s += binomial(n - 1, i - 1) * x[i - 1] * at(n - i, k - 1);
        at(n, k) = s;
      }
    }
  }

  double operator()(int n, int k) const {
    if (n < 0 || k < 0 || k > n || n > order_) return 0.0;
    return b_[n * (order_ + 1) + k];
  }

  // d B_{n,k} / d x_m = C(n, m) B_{n-m, k-1}
  double partial(int n, int k, int m) const { return binomial(n, m) * (*this)(n - m, k - 1); }

  int order() const { return order_; }

 private:
  double& at(int n, int k) { return b_[n * (order_ + 1) + k]; }

  int order_;
  std::vector<double> b_;
};

/// n-th derivative of f(g(x)) by Faa di Bruno's formula.
/// `outer[i-1]` = f^(i)(g(x)) and `inner[i-1]` = g^(i)(x) for i = 1..n.
inline double faa_di_bruno(std::span<const double> outer, std::span<const double> inner, int n) {
  if (n == 0) return 0.0;
  BellTable bell(inner, n);
  double s = 0.0;
  for (int i = 1; i <= n; ++i) s += outer[i - 1] * bell(n, i);
  return s;
}

}  // namespace copula_forge

#endif  // COPULA_FORGE_BELL_HPP
