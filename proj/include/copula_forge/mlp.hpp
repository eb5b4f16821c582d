#ifndef COPULA_FORGE_MLP_HPP
#define COPULA_FORGE_MLP_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "copula_forge/rng.hpp"

namespace copula_forge {

/// Fully connected network with LeakyReLU hidden layers and a linear final
/// layer. Parameters live in one flat vector, layer by layer: the weight
/// matrix (out x in, row-major) followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, double leaky_slope);

  /// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  void init_uniform(Rng& rng);

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  double leaky_slope() const { return slope_; }

  /// Number of doubles forward() records per input.
  std::size_t tape_size() const { return tape_size_; }

  /// Writes all pre-activations into `tape`; the final-layer output is the
  /// last output_dim() entries.
  void forward(std::span<const double> input, std::span<double> tape) const;

  /// Accumulates dL/dparams into `grad_params` and, if non-empty, writes
  /// dL/dinput into `grad_input`.
  void backward(std::span<const double> input, std::span<const double> tape,
                std::span<const double> grad_output, std::span<double> grad_params,
                std::span<double> grad_input) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<int> sizes_;
  double slope_ = 0.01;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::size_t tape_size_ = 0;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_MLP_HPP
