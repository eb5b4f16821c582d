#ifndef COPULA_FORGE_OPTIM_HPP
#define COPULA_FORGE_OPTIM_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace copula_forge {

/// SGD with heavy-ball momentum: v <- momentum v + g; p <- p - lr v.
class SgdMomentum {
 public:
  SgdMomentum(std::size_t size, double lr, double momentum);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

/// Adam with bias-corrected first and second moments.
class Adam {
 public:
  Adam(std::size_t size, double lr, double beta1, double beta2, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_OPTIM_HPP
