#include "copula_forge/parametric.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "copula_forge/bell.hpp"
#include "copula_forge/errors.hpp"

namespace copula_forge {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double mx = -kInf;
  for (double t : v) mx = std::max(mx, t);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double t : v) s += std::exp(t - mx);
  return mx + std::log(s);
}

// Eulerian numbers A(n, i), i = 0..n-1.
std::vector<double> eulerian_row(int n) {
  std::vector<double> row{1.0};
  for (int m = 2; m <= n; ++m) {
    std::vector<double> next(m, 0.0);
    for (int i = 0; i < m; ++i) {
      double a = (i < m - 1) ? row[i] : 0.0;
      double b = (i > 0) ? row[i - 1] : 0.0;
      next[i] = (i + 1) * a + (m - i) * b;
    }
    row = std::move(next);
  }
  return row;
}

// Stirling numbers of the second kind S(n, k), k = 0..n.
std::vector<double> stirling2_row(int n) {
  std::vector<double> row{1.0};
  for (int m = 1; m <= n; ++m) {
    std::vector<double> next(m + 1, 0.0);
    for (int k = 1; k <= m; ++k) {
      double a = (k < m) ? row[k] : 0.0;
      next[k] = k * a + row[k - 1];
    }
    row = std::move(next);
  }
  return row;
}

double falling(double a, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= (a - i);
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

void check_theta(Family f, double theta) {
  bool ok = std::isfinite(theta);
  switch (f) {
    case Family::Clayton:
    case Family::Frank:
    case Family::Nelsen19:
      ok = ok && theta > 0.0;
      break;
    case Family::Joe:
    case Family::Gumbel:
    case Family::Nelsen12:
      ok = ok && theta >= 1.0;
      break;
  }
  if (!ok)
    throw DomainError("theta=" + std::to_string(theta) + " outside admissible range of " +
                      to_string(f));
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Clayton: return "clayton";
    case Family::Frank: return "frank";
    case Family::Joe: return "joe";
    case Family::Gumbel: return "gumbel";
    case Family::Nelsen12: return "nelsen12";
    case Family::Nelsen19: return "nelsen19";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "clayton") return Family::Clayton;
  if (name == "frank") return Family::Frank;
  if (name == "joe") return Family::Joe;
  if (name == "gumbel") return Family::Gumbel;
  if (name == "nelsen12" || name == "12") return Family::Nelsen12;
  if (name == "nelsen19" || name == "19") return Family::Nelsen19;
  throw UnsupportedError("unknown copula family '" + std::string(name) + "'");
}

ParametricGenerator::ParametricGenerator(Family family, double theta) : family_(family), theta_(theta) {
  check_theta(family, theta);
}

double ParametricGenerator::phi(double x) const {
  if (!(x >= 0.0)) throw DomainError("phi: x must be >= 0");
  const double th = theta_;
  switch (family_) {
    case Family::Clayton:
      return std::exp(-std::log1p(x) / th);
    case Family::Frank: {
      // log(1 - w), w = (1 - e^-theta) e^-x; near w = 1 write 1 - w = (1 - e^-x) + e^-(x + theta).
      const double w = -std::expm1(-th) * std::exp(-x);
      if (w < 0.5) return -std::log1p(-w) / th;
      return -std::log(-std::expm1(-x) + std::exp(-x - th)) / th;
    }
    case Family::Joe:
      return 1.0 - std::pow(-std::expm1(-x), 1.0 / th);
    case Family::Gumbel:
      return std::exp(-std::pow(x, 1.0 / th));
    case Family::Nelsen12:
      return 1.0 / (1.0 + std::pow(x, 1.0 / th));
    case Family::Nelsen19:
      return th / std::log(x + std::exp(th));
  }
  return 0.0;
}

double ParametricGenerator::phi_inv(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("phi_inv: u must lie in (0, 1]");
  if (u == 1.0) return 0.0;
  const double th = theta_;
  switch (family_) {
    case Family::Clayton:
      return std::expm1(-th * std::log(u));
    case Family::Frank:
      return -std::log(std::expm1(-th * u) / std::expm1(-th));
    case Family::Joe:
      return -std::log1p(-std::pow(1.0 - u, th));
    case Family::Gumbel:
      return std::pow(-std::log(u), th);
    case Family::Nelsen12:
      return std::pow(1.0 / u - 1.0, th);
    case Family::Nelsen19:
      return std::exp(th / u) - std::exp(th);
  }
  return 0.0;
}

double ParametricGenerator::log_abs_deriv(int k, double x) const {
  if (k < 0) throw DomainError("derivative order must be >= 0");
  if (!(x >= 0.0)) throw DomainError("phi_deriv: x must be >= 0");
  if (k == 0) return std::log(phi(x));
  const double th = theta_;
  switch (family_) {
    case Family::Clayton: {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += std::log(1.0 / th + i);
      return s - (1.0 / th + k) * std::log1p(x);
    }
    case Family::Frank: {
      // |phi^(k)| = Li_{1-k}(w) / theta with w = (1 - e^-theta) e^-x.
      const double log_w = std::log(-std::expm1(-th)) - x;
      const double log_1mw = std::log1p(-std::exp(log_w));
      const int n = k - 1;
      if (n == 0) return log_w - log_1mw - std::log(th);
      auto eul = eulerian_row(n);
      std::vector<double> terms;
      for (int i = 0; i < n; ++i) terms.push_back(std::log(eul[i]) + (i + 1) * log_w);
      return log_sum_exp(terms) - (n + 1) * log_1mw - std::log(th);
    }
    case Family::Joe: {
      // |phi^(k)| = a s^(a-1) t sum_j S(k, j+1) prod_{i=1..j}(i - a) (t/s)^j,
      // with a = 1/theta, t = e^-x, s = 1 - t.
      const double a = 1.0 / th;
      if (x == 0.0) return a < 1.0 ? kInf : 0.0;
      const double log_s = std::log(-std::expm1(-x));
      const double log_ratio = -std::log(std::expm1(x));
      auto st = stirling2_row(k);
      std::vector<double> terms;
      double log_prod = 0.0;
      for (int j = 0; j < k; ++j) {
        if (j > 0) {
          if (j - a <= 0.0) break;  // a == 1: remaining terms vanish
          log_prod += std::log(j - a);
        }
        terms.push_back(std::log(st[j + 1]) + log_prod + j * log_ratio);
      }
      return std::log(a) + (a - 1.0) * log_s - x + log_sum_exp(terms);
    }
    default:
      return std::log(std::abs(phi_deriv(k, x)));
  }
}

double ParametricGenerator::phi_deriv(int k, double x) const {
  if (k < 0) throw DomainError("derivative order must be >= 0");
  if (!(x >= 0.0)) throw DomainError("phi_deriv: x must be >= 0");
  if (k == 0) return phi(x);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  const double th = theta_;
  switch (family_) {
    case Family::Clayton:
    case Family::Frank:
    case Family::Joe:
      return sign * std::exp(log_abs_deriv(k, x));
    default:
      break;
  }
  if (k > kMaxComposedOrder)
    throw UnsupportedError("phi_deriv order " + std::to_string(k) + " unsupported for " +
                           to_string(family_));
  std::array<double, kMaxComposedOrder> outer{};
  std::array<double, kMaxComposedOrder> inner{};
  switch (family_) {
    case Family::Gumbel:
    case Family::Nelsen12: {
      // phi = g(y), y = x^a
      const double a = 1.0 / th;
      const double y = std::pow(x, a);
      for (int m = 1; m <= k; ++m) inner[m - 1] = falling(a, m) * std::pow(x, a - m);
      for (int i = 1; i <= k; ++i) {
        const double s = (i % 2 == 0) ? 1.0 : -1.0;
        outer[i - 1] = family_ == Family::Gumbel ? s * std::exp(-y)
                                                 : s * factorial(i) / std::pow(1.0 + y, i + 1);
      }
      break;
    }
    case Family::Nelsen19: {
      // phi = theta / z, z = log(x + e^theta)
      const double base = x + std::exp(th);
      const double z = std::log(base);
      for (int m = 1; m <= k; ++m)
        inner[m - 1] = ((m % 2 == 1) ? 1.0 : -1.0) * factorial(m - 1) / std::pow(base, m);
      for (int i = 1; i <= k; ++i)
        outer[i - 1] = ((i % 2 == 0) ? 1.0 : -1.0) * th * factorial(i) / std::pow(z, i + 1);
      break;
    }
    default:
      break;
  }
  return faa_di_bruno(std::span<const double>(outer.data(), k), std::span<const double>(inner.data(), k), k);
}

bool ParametricGenerator::has_latent_sampler() const {
  return family_ != Family::Nelsen12 && family_ != Family::Nelsen19;
}

double ParametricGenerator::sample_latent(Rng& rng) const {
  switch (family_) {
    case Family::Clayton: return sample_gamma(1.0 / theta_, rng);
    case Family::Frank: return sample_logarithmic(-std::expm1(-theta_), rng);
    case Family::Joe: return sample_sibuya(1.0 / theta_, rng);
    case Family::Gumbel: return sample_positive_stable(1.0 / theta_, rng);
    default:
      throw UnsupportedError("no latent sampler for " + to_string(family_));
  }
}

double ParametricGenerator::kendall_tau() const {
  const double th = theta_;
  switch (family_) {
    case Family::Clayton: return th / (th + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / th;
    case Family::Nelsen12: return 1.0 - 2.0 / (3.0 * th);
    case Family::Joe: {
      if (th == 1.0) return 0.0;
      double s = 0.0;
      for (int k = 1; k < 2000000; ++k) {
        double term = 1.0 / (k * (th * k + 2.0) * (th * (k - 1) + 2.0));
        s += term;
        if (term < 1e-16 * s) break;
      }
      return 1.0 - 4.0 * s;
    }
    case Family::Frank: {
      // 1 - 4/theta (1 - D1(theta)), Debye D1 by Simpson's rule.
      const int n = 2000;
      const double h = th / n;
      auto f = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
      double s = f(0.0) + f(th);
      for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2) ? 4.0 : 2.0);
      const double d1 = s * h / 3.0 / th;
      return 1.0 - 4.0 / th * (1.0 - d1);
    }
    case Family::Nelsen19: {
      // 1 - 4/theta int_0^1 t^2 (1 - e^{theta (1 - 1/t)}) dt, Simpson's rule.
      const int n = 20000;
      const double h = 1.0 / n;
      auto f = [th](double t) { return t == 0.0 ? 0.0 : t * t * -std::expm1(th * (1.0 - 1.0 / t)); };
      double s = f(0.0) + f(1.0);
      for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2) ? 4.0 : 2.0);
      return 1.0 - 4.0 / th * (s * h / 3.0);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double sample_gamma(double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0);
  double v = g(rng);
  // Gamma draws with shape << 1 underflow to 0; keep the latent strictly positive.
  return v > 0.0 ? v : std::numeric_limits<double>::min();
}

double sample_logarithmic(double p, Rng& rng) {
  // Kemp (1981), algorithm LK.
  const double u = uniform_open(rng);
  if (u > p) return 1.0;
  const double h = std::log1p(-p);
  const double q = -std::expm1(uniform_open(rng) * h);
  if (u < q * q) return std::floor(1.0 + std::log(u) / std::log(q));
  if (u > q) return 1.0;
  return 2.0;
}

double sample_sibuya(double alpha, Rng& rng) {
  // Exact inversion of the survival function 1 / (k B(k, 1 - alpha)).
  const double u = uniform_open(rng);
  if (u <= alpha) return 1.0;
  const double x_max = 1.0 / std::numeric_limits<double>::epsilon();
  const double ginv = std::pow((1.0 - u) * std::tgamma(1.0 - alpha), -1.0 / alpha);
  const double fl = std::floor(ginv);
  if (ginv > x_max) return fl;
  const double log_beta = std::lgamma(fl) + std::lgamma(1.0 - alpha) - std::lgamma(fl + 1.0 - alpha);
  if (1.0 - u < std::exp(-std::log(fl) - log_beta)) return std::ceil(ginv);
  return fl;
}

double sample_positive_stable(double alpha, Rng& rng) {
  if (alpha == 1.0) return 1.0;
  // Kanter's representation.
  const double th = std::numbers::pi * uniform_open(rng);
  const double e = unit_exponential(rng);
  const double a = std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * th) / e, (1.0 - alpha) / alpha);
  return std::max(a * b, std::numeric_limits<double>::min());
}

double sample_tilted_stable(double alpha, double t, Rng& rng) {
  if (alpha == 1.0) return t;
  // Split t into pieces of length <= 1 so each rejection step accepts with
  // probability >= e^-1.
  const int pieces = std::max(1, static_cast<int>(std::ceil(t)));
  const double scale = std::pow(t / pieces, 1.0 / alpha);
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) {
    for (;;) {
      const double s = scale * sample_positive_stable(alpha, rng);
      if (uniform_open(rng) <= std::exp(-s)) {
        total += s;
        break;
      }
    }
  }
  return total;
}

}  // namespace copula_forge
