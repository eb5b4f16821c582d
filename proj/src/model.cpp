#include "copula_forge/model.hpp"

#include <cstring>

namespace copula_forge {

int HacSpec::dim() const {
  int d = 0;
  for (const auto& c : children) d += static_cast<int>(c.vars.size());
  return d;
}

Generator freeze_generator(const GeneratorSpec& spec, std::size_t latent_count, Rng& rng) {
  if (const auto* net = std::get_if<GeneratorNet>(&spec))
    return EmpiricalGenerator(net->sample_batch(latent_count, rng).m);
  return std::get<ParametricGenerator>(spec);
}

AcModel instantiate(const AcSpec& spec, std::size_t latent_count, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0xac);
  return AcModel(freeze_generator(spec.generator, latent_count, rng), spec.dim);
}

HacModel instantiate(const HacSpec& spec, std::size_t latent_count, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0x4ac);
  Generator outer = freeze_generator(spec.outer, latent_count, rng);
  std::vector<HacChild> children;
  for (const auto& c : spec.children)
    children.push_back(HacChild{Subordinator::freeze(c.sub, latent_count, rng), c.vars});
  return HacModel(std::move(outer), std::move(children));
}

std::uint64_t param_hash(const GeneratorSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  if (const auto* net = std::get_if<GeneratorNet>(&spec)) {
    auto p = net->params();
    mix(p.data(), p.size() * sizeof(double));
  } else {
    const auto& g = std::get<ParametricGenerator>(spec);
    const int f = static_cast<int>(g.family());
    const double th = g.theta();
    mix(&f, sizeof f);
    mix(&th, sizeof th);
  }
  return h;
}

}  // namespace copula_forge
