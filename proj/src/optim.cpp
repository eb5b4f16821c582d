#include "copula_forge/optim.hpp"

#include <cmath>

#include "copula_forge/errors.hpp"

namespace copula_forge {

SgdMomentum::SgdMomentum(std::size_t size, double lr, double momentum)
    : lr_(lr), momentum_(momentum), velocity_(size, 0.0) {}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != velocity_.size() || grad.size() != velocity_.size())
    throw ContractError("optimizer: parameter/gradient size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grad[i];
    params[i] -= lr_ * velocity_[i];
  }
}

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ContractError("optimizer: parameter/gradient size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

}  // namespace copula_forge
