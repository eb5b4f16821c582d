#include "copula_forge/copula_ac.hpp"

#include <algorithm>
#include <cmath>

#include "copula_forge/errors.hpp"

namespace copula_forge {

AcModel::AcModel(Generator gen, int dim) : gen_(std::move(gen)), dim_(dim) {
  if (dim < 2) throw DomainError("Archimedean copula needs dim >= 2");
}

double AcModel::cdf(std::span<const double> u) const {
  if (u.size() != static_cast<std::size_t>(dim_)) throw ContractError("cdf: point has wrong dimension");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("cdf: coordinates must lie in [0, 1]");
  double s = 0.0;
  for (double v : u) {
    if (v == 0.0) return 0.0;
    s += gen_.phi_inv(v);
  }
  return gen_.phi(s);
}

double AcModel::log_density(std::span<const double> u) const {
  if (u.size() != static_cast<std::size_t>(dim_)) throw ContractError("log_density: point has wrong dimension");
  for (double v : u)
    if (!(v > 0.0 && v < 1.0)) throw BoundaryError("log_density: coordinates must lie in (0, 1)");
  double s = 0.0;
  double denom = 0.0;
  for (double v : u) {
    const double y = gen_.phi_inv(v);
    s += y;
    denom += gen_.log_abs_deriv(1, y);
  }
  return gen_.log_abs_deriv(dim_, s) - denom;
}

Matrix AcModel::sample(std::size_t n, std::uint64_t seed) const {
  Matrix out(n, dim_);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    Rng rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    const double m = gen_.sample_latent(rng);
    for (int j = 0; j < dim_; ++j) out(r, j) = gen_.phi(unit_exponential(rng) / m);
  }
  return out;
}

Matrix sample_generative(const GeneratorNet& net, int dim, std::size_t n, std::size_t latent_count,
                         std::uint64_t seed, LatentDraw draw) {
  Rng rng = stream_rng(seed, ~0ULL);
  AcModel model(EmpiricalGenerator(net.sample_batch(latent_count, rng).m), dim);
  if (draw == LatentDraw::FromTransformSet) return model.sample(n, seed);

  Matrix out(n, dim);
  const auto rows = static_cast<std::ptrdiff_t>(n);
  const Generator& gen = model.generator();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    Rng row_rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    const double m = net.forward(uniform_open(row_rng));
    for (int j = 0; j < dim; ++j) out(r, j) = gen.phi(unit_exponential(row_rng) / m);
  }
  return out;
}

void clip_to_interior(std::span<double> u, double eps) {
  for (auto& v : u) v = std::clamp(v, eps, 1.0 - eps);
}

}  // namespace copula_forge
