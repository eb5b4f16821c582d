#ifndef COPULA_FORGE_SRC_TRAINING_DETAIL_HPP
#define COPULA_FORGE_SRC_TRAINING_DETAIL_HPP

// Plumbing shared by the flat and hierarchical trainers.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copula_forge/latent_net.hpp"
#include "copula_forge/matrix.hpp"
#include "copula_forge/rng.hpp"
#include "copula_forge/training.hpp"

namespace copula_forge::detail {

void validate_config(const TrainConfig& c);
void check_training_data(const Matrix& data, const char* what);

struct Split {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validation;
};

/// Seeded random hold-out of floor(fraction * n) rows; both parts sorted.
Split split_rows(std::size_t n, double fraction, std::uint64_t seed);

/// Minibatches that walk a shuffled permutation, reshuffling once exhausted.
class BatchCycler {
 public:
  BatchCycler(std::size_t n, std::size_t batch, Rng& rng);
  std::span<const std::size_t> next();

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_ = 0;
  Rng& rng_;
};

std::vector<double> draw_eps(std::size_t count, Rng& rng);

/// Loss trace, periodic validation NLL, best-checkpoint retention and the
/// per-epoch sink.
class Monitor {
 public:
  Monitor(const Matrix& validation, int dim, const TrainConfig& config, const EpochSink& sink);

  void record(int epoch, double loss, std::size_t failures, const GeneratorNet& net);
  void check_failures(int epoch, std::size_t failures, std::size_t solves) const;
  void warn(std::string message);
  /// Best checkpoint if validation ran, otherwise `last`.
  GeneratorNet finish(GeneratorNet last);
  FitReport& report() { return report_; }

 private:
  double elapsed() const;

  const Matrix& validation_;
  int dim_;
  const TrainConfig& config_;
  const EpochSink& sink_;
  FitReport report_;
  std::optional<GeneratorNet> best_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace copula_forge::detail

#endif  // COPULA_FORGE_SRC_TRAINING_DETAIL_HPP
