#include "copula_forge/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "copula_forge/errors.hpp"

namespace copula_forge {

Mlp::Mlp(std::vector<int> layer_sizes, double leaky_slope)
    : sizes_(std::move(layer_sizes)), slope_(leaky_slope) {
  if (sizes_.size() < 2) throw ContractError("Mlp needs at least an input and an output layer");
  for (int s : sizes_)
    if (s <= 0) throw ContractError("Mlp layer sizes must be positive");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
    tape_size_ += sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

void Mlp::init_uniform(Rng& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    const std::size_t n = static_cast<std::size_t>(out) * (in + 1);
    for (std::size_t i = 0; i < n; ++i) params_[offsets_[l] + i] = bound * (2.0 * uniform_open(rng) - 1.0);
  }
}

void Mlp::forward(std::span<const double> input, std::span<double> tape) const {
  std::size_t t = 0;
  const double* prev = input.data();
  bool prev_is_tape = false;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::size_t>(out) * in;
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      for (int i = 0; i < in; ++i) {
        double a = prev[i];
        if (prev_is_tape && a < 0.0) a *= slope_;
        z += w[o * in + i] * a;
      }
      tape[t + o] = z;
    }
    prev = tape.data() + t;
    prev_is_tape = true;
    t += out;
  }
}

void Mlp::backward(std::span<const double> input, std::span<const double> tape,
                   std::span<const double> grad_output, std::span<double> grad_params,
                   std::span<double> grad_input) const {
  const std::size_t layers = sizes_.size() - 1;
  // delta holds dL/d(pre-activation) of the current layer.
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> prev_delta;
  std::size_t t_end = tape_size_;
  for (std::size_t li = layers; li-- > 0;) {
    const int in = sizes_[li];
    const int out = sizes_[li + 1];
    const std::size_t t_out = t_end - out;
    const std::size_t t_in = t_out - (li > 0 ? in : 0);
    const double* w = params_.data() + offsets_[li];
    double* gw = grad_params.data() + offsets_[li];
    double* gb = gw + static_cast<std::size_t>(out) * in;
    auto act_in = [&](int i) {
      if (li == 0) return input[i];
      double z = tape[t_in + i];
      return z < 0.0 ? z * slope_ : z;
    };
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      for (int i = 0; i < in; ++i) gw[o * in + i] += d * act_in(i);
    }
    if (li == 0 && grad_input.empty()) break;
    prev_delta.assign(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      for (int i = 0; i < in; ++i) prev_delta[i] += d * w[o * in + i];
    }
    if (li == 0) {
      std::copy(prev_delta.begin(), prev_delta.end(), grad_input.begin());
      break;
    }
    for (int i = 0; i < in; ++i)
      if (tape[t_in + i] < 0.0) prev_delta[i] *= slope_;
    delta.swap(prev_delta);
    t_end = t_out;
  }
}

}  // namespace copula_forge
