#ifndef COPULA_FORGE_TRAINING_HPP
#define COPULA_FORGE_TRAINING_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/copula_hac.hpp"
#include "copula_forge/laplace.hpp"
#include "copula_forge/latent_net.hpp"
#include "copula_forge/matrix.hpp"
#include "copula_forge/mlp.hpp"
#include "copula_forge/model.hpp"
#include "copula_forge/optim.hpp"
#include "copula_forge/parametric.hpp"

namespace copula_forge {

enum class Method { Mle, Cvm, Gan };

std::string to_string(Method m);
/// "mle", "cvm", "gan" (also "adversarial").
Method parse_method(std::string_view name);

struct TrainConfig {
  Method method = Method::Mle;
  int epochs = 10000;
  int batch_size = 200;
  double lr = 1e-5;
  double momentum = 0.9;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  std::size_t latent_train = 100;
  std::size_t latent_eval = 1000;
  double newton_tol = kNewtonTol;
  std::uint64_t seed = 0;
  /// Reuse one set of latent noise for every step instead of redrawing it.
  bool common_random_numbers = false;
  /// Fraction of the training rows held out for checkpoint selection; 0
  /// disables selection and keeps the final parameters.
  double validation_fraction = 0.1;
  /// Validation NLL is computed every `eval_every` epochs and at the last one.
  int eval_every = 100;
  /// Adversarial generator loss: log(1 - D(fake)) instead of -log D(fake).
  bool minimax_generator_loss = false;
  /// Inversion failures above this fraction of an epoch's solves abort the fit.
  double max_failure_rate = 0.01;

  /// Optimiser defaults of each method: SGD 1e-5 / 0.9 for MLE, SGD 1e-3 / 0.9
  /// for CvM, Adam 1e-4 with betas (0.5, 0.999) for the adversarial fit.
  static TrainConfig defaults(Method m);
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_nll = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
  std::size_t solver_failures = 0;
  double wall_seconds = 0.0;
};

/// Called once per epoch.
using EpochSink = std::function<void(const EpochRecord&)>;
/// Writes one JSON object per line.
std::string to_json_line(const EpochRecord& r);

struct FitReport {
  std::vector<double> loss_trace;
  std::vector<EpochRecord> evaluations;  // epochs where val_nll was computed
  double best_val_nll = std::numeric_limits<double>::quiet_NaN();
  int best_epoch = -1;
  double train_nll = std::numeric_limits<double>::quiet_NaN();
  double test_nll = std::numeric_limits<double>::quiet_NaN();
  std::size_t clamp_events = 0;
  std::size_t solver_failures = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Mean of -log c over rows; rows are clipped to [1e-9, 1 - 1e-9] first.
double nll(const AcModel& model, const Matrix& data);
/// (1/N) sum_i (C(u_i) - C_N(u_i))^2 with C_N the empirical copula of `data`.
double cvm_statistic(const AcModel& model, const Matrix& data);
double cvm_statistic(const HacModel& model, const Matrix& data);

/// Loss and its gradient with respect to the L latent samples of `gen`.
struct LatentLoss {
  double loss = 0.0;
  std::vector<double> grad;
  std::size_t solves = 0;
  std::size_t failures = 0;  // rows skipped because an inversion failed
};

/// Summed -log c over the rows of `batch` (rows clipped to the interior).
LatentLoss mle_loss(const EmpiricalGenerator& gen, const Matrix& batch, double tol = kNewtonTol);
/// (1/n) sum_i (C(points_i) - targets_i)^2.
LatentLoss cvm_loss(const EmpiricalGenerator& gen, const Matrix& points,
                    std::span<const double> targets, double tol = kNewtonTol);

/// d -> 20 LeakyReLU -> 1 with a sigmoid output.
class DiscriminatorNet {
 public:
  DiscriminatorNet() = default;
  static DiscriminatorNet init(int dim, std::uint64_t seed);
  DiscriminatorNet(int dim, std::vector<double> params);

  int dim() const { return mlp_.input_dim(); }
  const Mlp& mlp() const { return mlp_; }
  std::span<double> params() { return mlp_.params(); }
  std::span<const double> params() const { return mlp_.params(); }

  double logit(std::span<const double> u) const;
  /// Probability that `u` is a real observation, in (0, 1).
  double operator()(std::span<const double> u) const;

  static constexpr int kHidden = 20;

  friend bool operator==(const DiscriminatorNet&, const DiscriminatorNet&) = default;

 private:
  Mlp mlp_;
};

/// Differentiable Marshall-Olkin draws U_rj = phi(E_rj / M_r) together with
/// what the generator gradient needs.
struct FakeBatch {
  Matrix u;
  std::vector<double> exps;          // E_rj, row-major like u
  std::vector<std::size_t> pick;     // index of M_r in the transform set
};

/// One alternating adversarial trainer; exposes the two half-steps.
class GanTrainer {
 public:
  GanTrainer(GeneratorNet gen, DiscriminatorNet disc, const TrainConfig& config);

  /// Ascends the discriminator objective on `real` against fresh fakes; the
  /// generator is left untouched. Returns the discriminator loss.
  double discriminator_step(const Matrix& real, Rng& rng);
  /// Descends the generator loss with the discriminator frozen.
  double generator_step(std::size_t rows, Rng& rng);

  /// Generator loss and gradient for fixed noise (used by gradient checks).
  double generator_loss(const GeneratorNet& gen, std::span<const double> latent_eps,
                        const Matrix& exps, std::span<const std::size_t> pick,
                        std::vector<double>* grad) const;

  const GeneratorNet& generator() const { return gen_; }
  const DiscriminatorNet& discriminator() const { return disc_; }
  std::size_t clamp_events() const { return clamp_events_; }

 private:
  GeneratorNet gen_;
  DiscriminatorNet disc_;
  TrainConfig config_;
  Adam gen_opt_;
  Adam disc_opt_;
  std::size_t clamp_events_ = 0;
  std::vector<double> crn_eps_;
};

/// Samples fake rows from a net with its own transform set.
FakeBatch make_fakes(const EmpiricalGenerator& gen, int dim, std::size_t rows, Rng& rng);

struct FlatFit {
  GeneratorNet net;
  FitReport report;
};

struct GanFit {
  GeneratorNet net;
  DiscriminatorNet disc;
  FitReport report;
};

FlatFit fit_mle(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                const EpochSink& sink = {});
FlatFit fit_cvm(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                const EpochSink& sink = {});
/// CvM fit of a copula on `points` against given empirical copula `targets`.
/// `validation` (possibly empty) drives checkpoint selection by NLL.
FlatFit fit_cvm_targets(const Matrix& points, std::span<const double> targets,
                        const Matrix& validation, const NetArchitecture& arch,
                        const TrainConfig& config, const EpochSink& sink = {});
GanFit fit_gan(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
               const EpochSink& sink = {});

/// Dispatches on config.method.
FlatFit fit_flat(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                 const EpochSink& sink = {});

/// Batch NLL (summed) and its gradient with respect to every network
/// parameter, for fixed latent noise `eps`.
double mle_batch_loss(const GeneratorNet& net, std::span<const double> eps, const Matrix& batch,
                      std::vector<double>* grad, double tol = kNewtonTol);
double cvm_batch_loss(const GeneratorNet& net, std::span<const double> eps, const Matrix& points,
                      std::span<const double> targets, std::vector<double>* grad,
                      double tol = kNewtonTol);

/// Empirical copula of `data` at each of its own rows.
std::vector<double> empirical_copula_at_rows(const Matrix& data);

// ---------------------------------------------------------------------------
// Hierarchical fit

enum class OuterKind { Generative, Parametric };

/// Outer generator choice: "gen", a family name (theta fitted by CvM), or
/// "family:theta" (held fixed).
struct OuterChoice {
  OuterKind kind = OuterKind::Generative;
  Family family = Family::Clayton;
  std::optional<double> theta;
};

OuterChoice parse_outer(std::string_view text);

struct HacFit {
  HacSpec spec;
  FitReport outer_report;
  std::vector<FitReport> child_reports;  // one per child; empty trace for singletons
};

/// Block-collapsed outer data: v_ij = C_N restricted to child j's columns,
/// evaluated at row i.
Matrix collapse_blocks(const Matrix& data, const std::vector<std::vector<int>>& structure);

/// Stage one: fits the outer generator on the collapsed points against the
/// full empirical copula values.
GeneratorSpec fit_hac_outer(const Matrix& train, const std::vector<std::vector<int>>& structure,
                            const OuterChoice& outer, const NetArchitecture& arch,
                            const TrainConfig& config, FitReport& report, const EpochSink& sink = {});

/// Parametric theta minimising (1/n) sum_i (C_theta(points_i) - targets_i)^2
/// by golden-section search over the family's range.
double fit_theta_cvm(Family family, const Matrix& points, std::span<const double> targets);

/// Summed -log c_j over rows of `a_block`, where a = phi_0^{-1}(u) per entry,
/// up to a term that does not depend on the subordinator. The gradient is laid
/// out as (mu_raw, beta_raw, jump network parameters).
double hac_child_batch_loss(const Generator& outer, const SubordinatorSpec& spec,
                            std::span<const double> eps, const Matrix& a_block,
                            std::vector<double>* grad, std::size_t* failures = nullptr);

/// Stage two for one child: MLE of (mu_raw, beta_raw, jump_net) with the outer
/// generator held fixed.
SubordinatorSpec fit_hac_child(const Generator& outer, const Matrix& block, const NetArchitecture& arch,
                               const TrainConfig& config, FitReport& report, const EpochSink& sink = {});

/// Both stages. `outer_config` drives stage one, `child_config` stage two.
HacFit fit_hac(const Matrix& train, const std::vector<std::vector<int>>& structure,
               const OuterChoice& outer, const TrainConfig& outer_config,
               const TrainConfig& child_config, const NetArchitecture& arch = {},
               const EpochSink& sink = {});

}  // namespace copula_forge

#endif  // COPULA_FORGE_TRAINING_HPP
