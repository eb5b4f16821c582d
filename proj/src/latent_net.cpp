#include "copula_forge/latent_net.hpp"

#include <algorithm>
#include <cmath>

#include "copula_forge/errors.hpp"

namespace copula_forge {
namespace {

std::vector<int> layer_sizes(const NetArchitecture& arch) {
  if (arch.hidden_widths.empty()) throw ContractError("generator net needs at least one hidden layer");
  std::vector<int> sizes{1};
  sizes.insert(sizes.end(), arch.hidden_widths.begin(), arch.hidden_widths.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

GeneratorNet::GeneratorNet(const NetArchitecture& arch) : arch_(arch), mlp_(layer_sizes(arch), arch.leaky_slope) {}

GeneratorNet GeneratorNet::init(const NetArchitecture& arch, std::uint64_t seed) {
  GeneratorNet net(arch);
  Rng rng = stream_rng(seed, 0x6e6574);
  net.mlp_.init_uniform(rng);
  return net;
}

GeneratorNet::GeneratorNet(const NetArchitecture& arch, std::vector<double> params) : GeneratorNet(arch) {
  if (params.size() != mlp_.param_count())
    throw ContractError("generator net expects " + std::to_string(mlp_.param_count()) +
                        " parameters, got " + std::to_string(params.size()));
  std::copy(params.begin(), params.end(), mlp_.params().begin());
}

double GeneratorNet::forward(double eps) const {
  std::vector<double> tape(mlp_.tape_size());
  const double in[1] = {eps};
  mlp_.forward(in, tape);
  return std::exp(std::clamp(tape.back(), -arch_.clamp, arch_.clamp));
}

SampleBatch GeneratorNet::evaluate(std::vector<double> eps) const {
  SampleBatch b;
  b.tape_stride = mlp_.tape_size();
  b.eps = std::move(eps);
  b.m.resize(b.eps.size());
  b.tape.resize(b.eps.size() * b.tape_stride);
  for (std::size_t l = 0; l < b.eps.size(); ++l) {
    std::span<double> tape(b.tape.data() + l * b.tape_stride, b.tape_stride);
    const double in[1] = {b.eps[l]};
    mlp_.forward(in, tape);
    const double z = tape.back();
    if (z > arch_.clamp || z < -arch_.clamp) ++b.clamp_events;
    b.m[l] = std::exp(std::clamp(z, -arch_.clamp, arch_.clamp));
  }
  return b;
}

SampleBatch GeneratorNet::sample_batch(std::size_t count, Rng& rng) const {
  std::vector<double> eps(count);
  for (auto& e : eps) e = uniform_open(rng);
  return evaluate(std::move(eps));
}

std::vector<double> GeneratorNet::backward(const SampleBatch& batch, std::span<const double> dloss_dm) const {
  if (dloss_dm.size() != batch.size())
    throw ContractError("backward: gradient length " + std::to_string(dloss_dm.size()) +
                        " does not match batch size " + std::to_string(batch.size()));
  if (batch.tape_stride != mlp_.tape_size() || batch.tape.size() != batch.size() * batch.tape_stride)
    throw ContractError("backward: batch tape does not belong to this network");
  std::vector<double> grad(mlp_.param_count(), 0.0);
  for (std::size_t l = 0; l < batch.size(); ++l) {
    std::span<const double> tape(batch.tape.data() + l * batch.tape_stride, batch.tape_stride);
    const double z = tape.back();
    if (dloss_dm[l] == 0.0 || z > arch_.clamp || z < -arch_.clamp) continue;
    const double dz[1] = {dloss_dm[l] * batch.m[l]};
    const double in[1] = {batch.eps[l]};
    mlp_.backward(in, tape, dz, grad, {});
  }
  return grad;
}

}  // namespace copula_forge
