#ifndef COPULA_FORGE_MODEL_HPP
#define COPULA_FORGE_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/copula_hac.hpp"
#include "copula_forge/latent_net.hpp"
#include "copula_forge/parametric.hpp"

namespace copula_forge {

/// A generator before its latent draws are frozen: a trainable net or a
/// closed-form family.
using GeneratorSpec = std::variant<GeneratorNet, ParametricGenerator>;

/// Number of latent draws used to build empirical transforms.
struct LatentCounts {
  std::size_t train = 100;
  std::size_t eval = 1000;

  friend bool operator==(const LatentCounts&, const LatentCounts&) = default;
};

struct AcSpec {
  GeneratorSpec generator;
  int dim = 2;
  LatentCounts latent;

  friend bool operator==(const AcSpec&, const AcSpec&) = default;
};

struct HacChildSpec {
  SubordinatorSpec sub;
  std::vector<int> vars;

  friend bool operator==(const HacChildSpec&, const HacChildSpec&) = default;
};

struct HacSpec {
  GeneratorSpec outer;
  std::vector<HacChildSpec> children;
  LatentCounts latent;

  int dim() const;
  friend bool operator==(const HacSpec&, const HacSpec&) = default;
};

/// Freezes `latent_count` draws of a generative spec (ignored for parametric).
Generator freeze_generator(const GeneratorSpec& spec, std::size_t latent_count, Rng& rng);

/// Evaluation model with transforms built from `latent_count` draws using
/// random stream `seed`; identical inputs give identical models.
AcModel instantiate(const AcSpec& spec, std::size_t latent_count, std::uint64_t seed);
HacModel instantiate(const HacSpec& spec, std::size_t latent_count, std::uint64_t seed);

/// Parameter vector hash (FNV-1a over the raw bytes); used to assert that a
/// component was left untouched.
std::uint64_t param_hash(const GeneratorSpec& spec);

}  // namespace copula_forge

#endif  // COPULA_FORGE_MODEL_HPP
