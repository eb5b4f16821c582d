#include "copula_forge/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "copula_forge/errors.hpp"

namespace copula_forge {
namespace {

constexpr double kMinExponent = -700.0;
constexpr int kMaxNewton = 50;
constexpr int kMaxBisection = 400;

}  // namespace

EmpiricalGenerator::EmpiricalGenerator(std::vector<double> samples) : m_(std::move(samples)) {
  if (m_.empty()) throw DomainError("empirical generator needs at least one latent sample");
  log_m_.resize(m_.size());
  double sum = 0.0;
  min_ = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < m_.size(); ++l) {
    if (!(m_[l] > 0.0) || !std::isfinite(m_[l]))
      throw DomainError("latent samples must be finite and strictly positive");
    log_m_[l] = std::log(m_[l]);
    sum += m_[l];
    min_ = std::min(min_, m_[l]);
  }
  mean_ = sum / static_cast<double>(m_.size());
}

double EmpiricalGenerator::phi(double x) const {
  if (!(x >= 0.0)) throw DomainError("elt: x must be >= 0");
  double s = 0.0;
  for (double m : m_) {
    const double e = -m * x;
    if (e > kMinExponent) s += std::exp(e);
  }
  return s / static_cast<double>(m_.size());
}

double EmpiricalGenerator::deriv(int k, double x) const {
  if (k < 0) throw DomainError("elt_deriv: k must be >= 0");
  if (!(x >= 0.0)) throw DomainError("elt_deriv: x must be >= 0");
  if (k == 0) return phi(x);
  double s = 0.0;
  for (std::size_t l = 0; l < m_.size(); ++l) {
    const double e = k * log_m_[l] - m_[l] * x;
    if (e > kMinExponent) s += std::exp(e);
  }
  s /= static_cast<double>(m_.size());
  return (k % 2 == 0) ? s : -s;
}

double EmpiricalGenerator::log_abs_deriv(int k, double x) const {
  if (k < 0) throw DomainError("elt_deriv: k must be >= 0");
  if (!(x >= 0.0)) throw DomainError("elt_deriv: x must be >= 0");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < m_.size(); ++l) mx = std::max(mx, k * log_m_[l] - m_[l] * x);
  double s = 0.0;
  for (std::size_t l = 0; l < m_.size(); ++l) s += std::exp(k * log_m_[l] - m_[l] * x - mx);
  return mx + std::log(s / static_cast<double>(m_.size()));
}

double EmpiricalGenerator::log_abs_deriv(int k, double x, std::span<double> weights) const {
  if (weights.size() != m_.size()) throw ContractError("weights span must have one slot per sample");
  if (!(x >= 0.0)) throw DomainError("elt_deriv: x must be >= 0");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < m_.size(); ++l) {
    weights[l] = k * log_m_[l] - m_[l] * x;
    mx = std::max(mx, weights[l]);
  }
  double s = 0.0;
  for (auto& w : weights) {
    w = std::exp(w - mx);
    s += w;
  }
  for (auto& w : weights) w /= s;
  return mx + std::log(s / static_cast<double>(m_.size()));
}

InverseResult EmpiricalGenerator::solve_inverse(double u, double tol) const {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("elt_inverse: u must lie in (0, 1]");
  InverseResult res;
  if (u == 1.0) {
    res.converged = true;
    return res;
  }
  const double log_u = std::log(u);
  // log phi(y) and -(log phi)'(y) = phi_1/phi_0, shifted by the largest summand.
  auto eval = [&](double y, double& log_phi, double& slope) {
    const double shift = -min_ * y;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t l = 0; l < m_.size(); ++l) {
      const double e = std::exp(-m_[l] * y - shift);
      s0 += e;
      s1 += m_[l] * e;
    }
    log_phi = shift + std::log(s0 / static_cast<double>(m_.size()));
    slope = s1 / s0;
  };
  auto done = [&](double log_phi) { return std::abs(log_phi - log_u) <= tol; };

  // Jensen: phi(y0) >= u, so y0 lies left of the root. log phi is convex and
  // decreasing, hence Newton iterates increase monotonically to the root.
  double y = -log_u / mean_;
  double log_phi = 0.0, slope = 0.0;
  for (int it = 0; it < kMaxNewton; ++it) {
    eval(y, log_phi, slope);
    res.iterations = it + 1;
    if (done(log_phi)) {
      res.y = y;
      res.converged = true;
      res.residual = std::abs(std::exp(log_phi) - u);
      return res;
    }
    const double next = y + (log_phi - log_u) / slope;
    if (!std::isfinite(next) || next < 0.0) break;
    y = next;
  }

  // Bisection on a bracket [lo, hi] with phi(lo) >= u > phi(hi).
  double lo = 0.0;
  double hi = std::max(y, 1.0);
  for (int i = 0; i < 2000; ++i) {
    eval(hi, log_phi, slope);
    if (log_phi < log_u) break;
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    eval(mid, log_phi, slope);
    ++res.iterations;
    if (done(log_phi) || mid == lo || mid == hi) {
      res.y = mid;
      res.residual = std::abs(std::exp(log_phi) - u);
      res.converged = done(log_phi) || res.residual <= tol;
      return res;
    }
    (log_phi > log_u ? lo : hi) = mid;
  }
  res.y = 0.5 * (lo + hi);
  eval(res.y, log_phi, slope);
  res.residual = std::abs(std::exp(log_phi) - u);
  res.converged = res.residual <= tol;
  return res;
}

double EmpiricalGenerator::inverse(double u, double tol) const {
  const InverseResult r = solve_inverse(u, tol);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "elt_inverse did not converge: u=" << u << " y=" << r.y << " residual=" << r.residual
        << " iterations=" << r.iterations << " L=" << m_.size();
    throw SolverError(msg.str());
  }
  return r.y;
}

std::vector<double> EmpiricalGenerator::inverse_grad(double u, double y) const {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("inverse_grad: u must lie in (0, 1]");
  std::vector<double> g(m_.size(), 0.0);
  if (y == 0.0) return g;
  // dy/dm_l = -(y/L) e^{-m_l y} / |phi'(y)|, evaluated with a common shift.
  const double shift = -min_ * y;
  double s1 = 0.0;
  for (std::size_t l = 0; l < m_.size(); ++l) {
    g[l] = std::exp(-m_[l] * y - shift);
    s1 += m_[l] * g[l];
  }
  if (!(s1 > 0.0) || !std::isfinite(s1)) {
    std::ostringstream msg;
    msg << "inverse_grad: singular slope phi'(y) at y=" << y << " u=" << u;
    throw SolverError(msg.str());
  }
  for (auto& v : g) v = -y * v / s1;
  return g;
}

std::vector<double> EmpiricalGenerator::sample_grads(int k, double x) const {
  if (k < 0) throw DomainError("sample_grads: k must be >= 0");
  if (!(x >= 0.0)) throw DomainError("sample_grads: x must be >= 0");
  std::vector<double> g(m_.size());
  const double inv_l = 1.0 / static_cast<double>(m_.size());
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t l = 0; l < m_.size(); ++l) {
    const double m = m_[l];
    const double e = std::exp(-m * x);
    const double mk1 = k >= 1 ? std::pow(m, k - 1) : 0.0;
    g[l] = sign * inv_l * (k * mk1 - x * mk1 * m) * e;
    if (k == 0) g[l] = -inv_l * x * e;
  }
  return g;
}

}  // namespace copula_forge
