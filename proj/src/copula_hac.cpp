#include "copula_forge/copula_hac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "copula_forge/bell.hpp"
#include "copula_forge/errors.hpp"

namespace copula_forge {

double SubordinatorSpec::mu() const { return std::exp(mu_raw); }
double SubordinatorSpec::beta() const { return std::exp(beta_raw); }

Subordinator::Subordinator(double mu, double beta, EmpiricalGenerator jumps)
    : mu_(mu), beta_(beta), jumps_(std::move(jumps)) {
  if (!(mu > 0.0) || !(beta > 0.0)) throw DomainError("subordinator needs mu > 0 and beta > 0");
}

Subordinator Subordinator::freeze(const SubordinatorSpec& spec, std::size_t latent_count, Rng& rng) {
  return Subordinator(spec.mu(), spec.beta(), EmpiricalGenerator(spec.jump_net.sample_batch(latent_count, rng).m));
}

double Subordinator::psi(double x) const {
  if (!(x >= 0.0)) throw DomainError("psi: x must be >= 0");
  return mu_ * x + beta_ * (1.0 - jumps_.phi(x));
}

double Subordinator::psi_deriv(int k, double x) const {
  if (k < 0) throw DomainError("psi_deriv: k must be >= 0");
  if (k == 0) return psi(x);
  const double d = -beta_ * jumps_.deriv(k, x);
  return k == 1 ? mu_ + d : d;
}

double Subordinator::psi_inv(double a) const {
  if (!(a >= 0.0)) throw DomainError("psi_inv: argument must be >= 0");
  if (a == 0.0) return 0.0;
  if (!std::isfinite(a)) return a;
  const double tol = 1e-13 * std::max(1.0, a);
  double lo = 0.0;
  double hi = a / mu_;  // psi(y) >= mu y
  double y = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double f = psi(y) - a;
    if (std::abs(f) <= tol) return y;
    if (f < 0.0) lo = y; else hi = y;
    double next = y - f / psi_deriv(1, y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) return y;
    y = next;
  }
  std::ostringstream msg;
  msg << "psi_inv did not converge for a=" << a << " (mu=" << mu_ << ", beta=" << beta_ << ")";
  throw SolverError(msg.str());
}

double Subordinator::sample(double t, Rng& rng) const {
  std::poisson_distribution<long long> count(beta_ * t);
  const long long n = count(rng);
  const auto m = jumps_.samples();
  std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
  double total = mu_ * t;
  for (long long i = 0; i < n; ++i) total += m[pick(rng)];
  return total;
}

double sample_cpp(const SubordinatorSpec& spec, double t, Rng& rng) {
  if (!(t > 0.0)) throw DomainError("sample_cpp: t must be > 0");
  std::poisson_distribution<long long> count(spec.beta() * t);
  const long long n = count(rng);
  double total = spec.mu() * t;
  for (long long i = 0; i < n; ++i) total += spec.jump_net.forward(uniform_open(rng));
  return total;
}

HacModel::HacModel(Generator outer, std::vector<HacChild> children)
    : outer_(std::move(outer)), children_(std::move(children)) {
  if (children_.size() < 2) throw DomainError("hierarchical copula needs at least two children");
  std::vector<int> seen;
  for (const auto& c : children_) {
    if (c.vars.empty()) throw DomainError("every child needs at least one variable");
    if (static_cast<int>(c.vars.size()) > kMaxOrder)
      throw UnsupportedError("child dimension exceeds the supported derivative order");
    seen.insert(seen.end(), c.vars.begin(), c.vars.end());
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != static_cast<int>(i)) throw DomainError("child variables must partition 0..d-1");
  dim_ = static_cast<int>(seen.size());
}

double HacModel::inner_phi(std::size_t j, double x) const { return outer_.phi(children_.at(j).sub.psi(x)); }

double HacModel::inner_phi_deriv(std::size_t j, int k, double x) const {
  if (k == 0) return inner_phi(j, x);
  if (k < 0 || k > kMaxOrder)
    throw UnsupportedError("inner generator derivative of order " + std::to_string(k) + " unsupported");
  const Subordinator& sub = children_.at(j).sub;
  const double z = sub.psi(x);
  std::array<double, kMaxOrder> outer{};
  std::array<double, kMaxOrder> inner{};
  for (int i = 1; i <= k; ++i) {
    outer[i - 1] = outer_.deriv(i, z);
    inner[i - 1] = sub.psi_deriv(i, x);
  }
  return faa_di_bruno(std::span<const double>(outer.data(), k), std::span<const double>(inner.data(), k), k);
}

double HacModel::inner_phi_inv(std::size_t j, double u) const {
  return children_.at(j).sub.psi_inv(outer_.phi_inv(u));
}

double HacModel::child_cdf(std::size_t j, std::span<const double> block) const {
  const Subordinator& sub = children_.at(j).sub;
  double s = 0.0;
  for (double v : block) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("cdf: coordinates must lie in [0, 1]");
    if (v == 0.0) return 0.0;
    s += sub.psi_inv(outer_.phi_inv(v));
  }
  return outer_.phi(sub.psi(s));
}

double HacModel::cdf(std::span<const double> u) const {
  if (u.size() != static_cast<std::size_t>(dim_)) throw ContractError("cdf: point has wrong dimension");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("cdf: coordinates must lie in [0, 1]");
  double total = 0.0;
  for (const auto& c : children_) {
    double s = 0.0;
    for (int v : c.vars) {
      if (u[v] == 0.0) return 0.0;
      s += c.sub.psi_inv(outer_.phi_inv(u[v]));
    }
    // phi_0^{-1}(C_j(u_j)) = psi_j(s) without a round trip through phi_0.
    total += c.sub.psi(s);
  }
  return outer_.phi(total);
}

double HacModel::child_log_density(std::size_t j, std::span<const double> block) const {
  const HacChild& child = children_.at(j);
  const int k = static_cast<int>(child.vars.size());
  if (block.size() != child.vars.size()) throw ContractError("child block has wrong dimension");
  for (double v : block)
    if (!(v > 0.0 && v < 1.0)) throw BoundaryError("child density: coordinates must lie in (0, 1)");
  if (k == 1) return 0.0;
  double s = 0.0;
  double denom = 0.0;
  for (double v : block) {
    const double a = outer_.phi_inv(v);
    const double y = child.sub.psi_inv(a);
    s += y;
    // phi_j'(y) = phi_0'(psi(y)) psi'(y) with psi(y) = a
    denom += outer_.log_abs_deriv(1, a) + std::log(child.sub.psi_deriv(1, y));
  }
  const double num = inner_phi_deriv(j, k, s);
  return std::log(std::abs(num)) - denom;
}

Matrix HacModel::sample(std::size_t n, std::uint64_t seed) const {
  Matrix out(n, dim_);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    const double m = outer_.sample_latent(rng);
    for (const auto& c : children_) {
      const double lambda = c.sub.sample(m, rng);
      for (int v : c.vars) out(r, v) = outer_.phi(c.sub.psi(unit_exponential(rng) / lambda));
    }
  }
  return out;
}

std::vector<std::vector<int>> consecutive_partition(std::span<const int> sizes) {
  std::vector<std::vector<int>> parts;
  int next = 0;
  for (int s : sizes) {
    if (s < 1) throw DomainError("child sizes must be >= 1");
    std::vector<int> p(s);
    for (auto& v : p) v = next++;
    parts.push_back(std::move(p));
  }
  return parts;
}

}  // namespace copula_forge
