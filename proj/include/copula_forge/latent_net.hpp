#ifndef COPULA_FORGE_LATENT_NET_HPP
#define COPULA_FORGE_LATENT_NET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "copula_forge/mlp.hpp"
#include "copula_forge/rng.hpp"

namespace copula_forge {

struct NetArchitecture {
  std::vector<int> hidden_widths{10, 10};
  double leaky_slope = 0.01;
  /// Pre-exp activation is clamped to [-clamp, clamp].
  double clamp = 30.0;

  friend bool operator==(const NetArchitecture&, const NetArchitecture&) = default;
};

/// Latent draws M_l = G(eps_l) together with the recorded forward pass.
struct SampleBatch {
  std::vector<double> eps;
  std::vector<double> m;
  std::vector<double> tape;  // tape_stride pre-activations per draw
  std::size_t tape_stride = 0;
  std::size_t clamp_events = 0;

  std::size_t size() const { return m.size(); }
};

/// Generator network G(eps; params) with scalar U(0,1) input and exp output,
/// so every draw is strictly positive.
class GeneratorNet {
 public:
  GeneratorNet() = default;
  /// Deterministic for a fixed (arch, seed).
  static GeneratorNet init(const NetArchitecture& arch, std::uint64_t seed);
  /// Rebuilds a net from stored parameters; throws ContractError on a size mismatch.
  GeneratorNet(const NetArchitecture& arch, std::vector<double> params);

  const NetArchitecture& arch() const { return arch_; }
  std::span<double> params() { return mlp_.params(); }
  std::span<const double> params() const { return mlp_.params(); }
  std::size_t param_count() const { return mlp_.param_count(); }

  double forward(double eps) const;

  SampleBatch sample_batch(std::size_t count, Rng& rng) const;
  SampleBatch evaluate(std::vector<double> eps) const;

  /// Gradient of sum_l dloss_dm[l] * M_l with respect to every parameter.
  std::vector<double> backward(const SampleBatch& batch, std::span<const double> dloss_dm) const;

  friend bool operator==(const GeneratorNet&, const GeneratorNet&) = default;

 private:
  explicit GeneratorNet(const NetArchitecture& arch);

  NetArchitecture arch_;
  Mlp mlp_;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_LATENT_NET_HPP
