#include "copula_forge/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "copula_forge/detail/parallel.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/model.hpp"
#include "copula_forge/stats.hpp"
#include "training_detail.hpp"

namespace copula_forge {

std::string to_string(Method m) {
  switch (m) {
    case Method::Mle: return "mle";
    case Method::Cvm: return "cvm";
    case Method::Gan: return "gan";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "mle") return Method::Mle;
  if (name == "cvm") return Method::Cvm;
  if (name == "gan" || name == "adversarial") return Method::Gan;
  throw DomainError("unknown training method '" + std::string(name) + "'");
}

TrainConfig TrainConfig::defaults(Method m) {
  TrainConfig c;
  c.method = m;
  switch (m) {
    case Method::Mle:
      c.lr = 1e-5;
      c.momentum = 0.9;
      break;
    case Method::Cvm:
      c.lr = 1e-3;
      c.momentum = 0.9;
      break;
    case Method::Gan:
      c.lr = 1e-4;
      c.adam_beta1 = 0.5;
      c.adam_beta2 = 0.999;
      break;
  }
  return c;
}

std::string to_json_line(const EpochRecord& r) {
  std::ostringstream os;
  os.precision(10);
  os << "{\"epoch\":" << r.epoch << ",\"loss\":" << r.loss << ",\"nll\":";
  if (std::isnan(r.val_nll))
    os << "null";
  else
    os << r.val_nll;
  os << ",\"solver_failures\":" << r.solver_failures << ",\"wall_time\":" << r.wall_seconds << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_unit_data(const Matrix& data, const char* what) {
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t c = 0; c < data.cols(); ++c) {
      const double v = data(r, c);
      if (!(v >= 0.0 && v <= 1.0))
        throw DomainError(std::string(what) + ": entry (" + std::to_string(r) + ", " +
                          std::to_string(c) + ") is not in [0, 1]");
    }
}

}  // namespace

double nll(const AcModel& model, const Matrix& data) {
  if (data.rows() == 0) throw DomainError("nll: empty data");
  check_unit_data(data, "nll");
  Matrix clipped = data;
  for (std::size_t r = 0; r < clipped.rows(); ++r) clip_to_interior(clipped.row(r));
  const auto ld = kernels::parallel::log_density_rows(model, clipped);
  double s = 0.0;
  for (double v : ld) s += v;
  return -s / static_cast<double>(ld.size());
}

std::vector<double> empirical_copula_at_rows(const Matrix& data) {
  return kernels::parallel::empirical_copula_rows(data, data);
}

double cvm_statistic(const AcModel& model, const Matrix& data) {
  const auto model_values = kernels::parallel::cdf_rows(model, data);
  return cvm_distance(model_values, empirical_copula_at_rows(data));
}

double cvm_statistic(const HacModel& model, const Matrix& data) {
  const auto model_values = kernels::parallel::cdf_rows(model, data);
  return cvm_distance(model_values, empirical_copula_at_rows(data));
}

// ---------------------------------------------------------------------------
// Losses with respect to the latent samples

namespace {

// y_i = phi^{-1}(u_i) for one row; false if any solve did not converge.
bool invert_row(const EmpiricalGenerator& g, std::span<const double> u, double tol,
                std::span<double> y) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const InverseResult r = g.solve_inverse(u[i], tol);
    if (!r.converged) return false;
    y[i] = r.y;
  }
  return true;
}

// Per-row terms land in rows x L scratch, then get summed in row order so the
// result does not depend on the thread partition.
LatentLoss reduce_rows(std::size_t rows, std::size_t L, const std::vector<double>& loss,
                       const std::vector<double>& grad, const std::vector<char>& ok,
                       std::size_t solves_per_row, double scale) {
  LatentLoss out;
  out.grad.assign(L, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    out.solves += solves_per_row;
    if (!ok[r]) {
      ++out.failures;
      continue;
    }
    out.loss += loss[r];
    const double* g = grad.data() + r * L;
    for (std::size_t l = 0; l < L; ++l) out.grad[l] += g[l];
  }
  out.loss *= scale;
  for (auto& g : out.grad) g *= scale;
  return out;
}

}  // namespace

LatentLoss mle_loss(const EmpiricalGenerator& g, const Matrix& batch, double tol) {
  const std::size_t n = batch.rows(), d = batch.cols(), L = g.size();
  if (d < 2) throw DomainError("mle_loss: need at least two columns");
  const auto m = g.samples();
  std::vector<double> loss(n, 0.0), grad(n * L, 0.0);
  std::vector<char> ok(n, 0);

  detail::parallel_for(n, [&](std::size_t r) {
    std::vector<double> u(batch.row(r).begin(), batch.row(r).end());
    clip_to_interior(u);
    std::vector<double> y(d);
    if (!invert_row(g, u, tol, y)) return;
    const double x = std::accumulate(y.begin(), y.end(), 0.0);

    // Numerator |phi^(d)(x)| with softmax weights w.
    std::vector<double> w(L), v(L), sum_dy(L, 0.0), acc(L, 0.0);
    const double log_num = g.log_abs_deriv(static_cast<int>(d), x, w);
    double mean_w = 0.0;
    for (std::size_t l = 0; l < L; ++l) mean_w += w[l] * m[l];

    double log_den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      log_den += g.log_abs_deriv(1, y[i], v);
      double mean_v = 0.0;
      for (std::size_t l = 0; l < L; ++l) mean_v += v[l] * m[l];
      for (std::size_t l = 0; l < L; ++l) {
        const double dy = -y[i] * v[l] / m[l];
        sum_dy[l] += dy;
        acc[l] += v[l] * (1.0 - m[l] * y[i]) / m[l] - mean_v * dy;
      }
    }
    loss[r] = -(log_num - log_den);
    double* gr = grad.data() + r * L;
    const double dd = static_cast<double>(d);
    for (std::size_t l = 0; l < L; ++l)
      gr[l] = -(w[l] * (dd / m[l] - x) - mean_w * sum_dy[l] - acc[l]);
    ok[r] = 1;
  });
  return reduce_rows(n, L, loss, grad, ok, d, 1.0);
}

LatentLoss cvm_loss(const EmpiricalGenerator& g, const Matrix& points, std::span<const double> targets,
                    double tol) {
  const std::size_t n = points.rows(), d = points.cols(), L = g.size();
  if (targets.size() != n) throw ContractError("cvm_loss: one target per point required");
  if (n == 0) throw DomainError("cvm_loss: no points");
  const auto m = g.samples();
  std::vector<double> loss(n, 0.0), grad(n * L, 0.0);
  std::vector<char> ok(n, 0);

  detail::parallel_for(n, [&](std::size_t r) {
    std::vector<double> u(points.row(r).begin(), points.row(r).end());
    clip_to_interior(u);
    std::vector<double> y(d);
    if (!invert_row(g, u, tol, y)) return;
    const double x = std::accumulate(y.begin(), y.end(), 0.0);

    std::vector<double> w0(L), v(L), sum_dy(L, 0.0);
    const double c = std::exp(g.log_abs_deriv(0, x, w0));
    double mean_w0 = 0.0;
    for (std::size_t l = 0; l < L; ++l) mean_w0 += w0[l] * m[l];
    for (std::size_t i = 0; i < d; ++i) {
      g.log_abs_deriv(1, y[i], v);
      for (std::size_t l = 0; l < L; ++l) sum_dy[l] += -y[i] * v[l] / m[l];
    }
    const double resid = c - targets[r];
    loss[r] = resid * resid;
    double* gr = grad.data() + r * L;
    for (std::size_t l = 0; l < L; ++l)
      gr[l] = 2.0 * resid * c * (-x * w0[l] - mean_w0 * sum_dy[l]);
    ok[r] = 1;
  });
  return reduce_rows(n, L, loss, grad, ok, d, 1.0 / static_cast<double>(n));
}

double mle_batch_loss(const GeneratorNet& net, std::span<const double> eps, const Matrix& batch,
                      std::vector<double>* grad, double tol) {
  const SampleBatch sb = net.evaluate(std::vector<double>(eps.begin(), eps.end()));
  const LatentLoss ll = mle_loss(EmpiricalGenerator(sb.m), batch, tol);
  if (grad) *grad = net.backward(sb, ll.grad);
  return ll.loss;
}

double cvm_batch_loss(const GeneratorNet& net, std::span<const double> eps, const Matrix& points,
                      std::span<const double> targets, std::vector<double>* grad, double tol) {
  const SampleBatch sb = net.evaluate(std::vector<double>(eps.begin(), eps.end()));
  const LatentLoss ll = cvm_loss(EmpiricalGenerator(sb.m), points, targets, tol);
  if (grad) *grad = net.backward(sb, ll.grad);
  return ll.loss;
}

// ---------------------------------------------------------------------------
// Shared training plumbing

namespace detail {

void validate_config(const TrainConfig& c) {
  if (c.epochs < 0) throw DomainError("epochs must be >= 0");
  if (c.batch_size < 1) throw DomainError("batch size must be >= 1");
  if (!(c.lr > 0.0)) throw DomainError("learning rate must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (c.latent_train < 1 || c.latent_eval < 1) throw DomainError("latent sample counts must be >= 1");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0))
    throw DomainError("validation fraction must lie in [0, 1)");
  if (c.eval_every < 1) throw DomainError("eval_every must be >= 1");
}

Split split_rows(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Split s;
  auto n_val = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = n - 1;
  if (n_val == 0) {
    s.fit = std::move(idx);
    return s;
  }
  Rng rng = stream_rng(seed, 0x5b11);
  std::shuffle(idx.begin(), idx.end(), rng);
  s.validation.assign(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
  s.fit.assign(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));
  std::sort(s.fit.begin(), s.fit.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

BatchCycler::BatchCycler(std::size_t n, std::size_t batch, Rng& rng)
    : order_(n), batch_(std::min(batch, n)), rng_(rng) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
}

std::span<const std::size_t> BatchCycler::next() {
  if (pos_ + batch_ > order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  std::span<const std::size_t> out(order_.data() + pos_, batch_);
  pos_ += batch_;
  return out;
}

std::vector<double> draw_eps(std::size_t count, Rng& rng) {
  std::vector<double> eps(count);
  for (auto& e : eps) e = uniform_open(rng);
  return eps;
}

Monitor::Monitor(const Matrix& validation, int dim, const TrainConfig& config, const EpochSink& sink)
    : validation_(validation), dim_(dim), config_(config), sink_(sink),
      start_(std::chrono::steady_clock::now()) {
  report_.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
}

double Monitor::elapsed() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void Monitor::record(int epoch, double loss, std::size_t failures, const GeneratorNet& net) {
  report_.loss_trace.push_back(loss);
  report_.solver_failures += failures;
  EpochRecord rec;
  rec.epoch = epoch;
  rec.loss = loss;
  rec.solver_failures = failures;
  const bool due = (epoch + 1) % config_.eval_every == 0 || epoch + 1 == config_.epochs;
  if (validation_.rows() > 0 && due) {
    // The same evaluation noise every time keeps checkpoints comparable.
    const AcModel model = instantiate(AcSpec{net, dim_, {}}, config_.latent_eval,
                                      splitmix64(config_.seed ^ 0xe7a1ULL));
    rec.val_nll = nll(model, validation_);
    if (std::isfinite(rec.val_nll) && (report_.best_epoch < 0 || rec.val_nll < report_.best_val_nll)) {
      report_.best_val_nll = rec.val_nll;
      report_.best_epoch = epoch;
      best_ = net;
    }
  }
  rec.wall_seconds = elapsed();
  if (!std::isnan(rec.val_nll)) report_.evaluations.push_back(rec);
  if (sink_) sink_(rec);
}

void Monitor::check_failures(int epoch, std::size_t failures, std::size_t solves) const {
  if (solves == 0) return;
  if (static_cast<double>(failures) > config_.max_failure_rate * static_cast<double>(solves)) {
    std::ostringstream os;
    os << "inversion failed for " << failures << " of " << solves << " rows at epoch " << epoch
       << " (limit " << config_.max_failure_rate * 100.0 << "%)";
    throw SolverError(os.str());
  }
}

void Monitor::warn(std::string message) {
  if (std::find(report_.warnings.begin(), report_.warnings.end(), message) == report_.warnings.end())
    report_.warnings.push_back(std::move(message));
}

GeneratorNet Monitor::finish(GeneratorNet last) {
  report_.wall_seconds = elapsed();
  if (best_) return *best_;
  return last;
}

void check_training_data(const Matrix& data, const char* what) {
  if (data.cols() < 2) throw DomainError(std::string(what) + ": data needs at least two columns");
  if (data.rows() < 1) throw DomainError(std::string(what) + ": data has no rows");
  check_unit_data(data, what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Likelihood and minimum-distance fits

namespace {

using detail::Monitor;

// Applies one SGD step per epoch with gradient from `step(net, eps, rows)`.
template <class Step>
FlatFit run_sgd(std::size_t rows, const Matrix& validation, int dim, const NetArchitecture& arch,
                const TrainConfig& config, const EpochSink& sink, Step&& step) {
  detail::validate_config(config);
  GeneratorNet net = GeneratorNet::init(arch, config.seed);
  SgdMomentum opt(net.param_count(), config.lr, config.momentum);
  Rng rng = stream_rng(config.seed, 0x7261696e);
  detail::BatchCycler batches(rows, static_cast<std::size_t>(config.batch_size), rng);
  const std::vector<double> crn = detail::draw_eps(config.latent_train, rng);
  Monitor mon(validation, dim, config, sink);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto idx = batches.next();
    const std::vector<double> eps =
        config.common_random_numbers ? crn : detail::draw_eps(config.latent_train, rng);
    const SampleBatch sb = net.evaluate(eps);
    mon.report().clamp_events += sb.clamp_events;
    const EmpiricalGenerator gen(sb.m);
    double per_row = 1.0;
    const LatentLoss ll = step(gen, idx, per_row);
    mon.check_failures(epoch, ll.failures, ll.solves);
    const std::vector<double> grad = net.backward(sb, ll.grad);
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }))
      opt.step(net.params(), grad);
    else
      mon.warn("non-finite gradient; step skipped");
    mon.record(epoch, ll.loss * per_row, ll.failures, net);
  }
  FlatFit fit{mon.finish(net), std::move(mon.report())};
  return fit;
}

void finish_report(FlatFit& fit, const Matrix& fit_rows, int dim, const TrainConfig& config) {
  if (fit_rows.rows() == 0) return;
  const AcModel model = instantiate(AcSpec{fit.net, dim, {}}, config.latent_eval,
                                    splitmix64(config.seed ^ 0xe7a1ULL));
  fit.report.train_nll = nll(model, fit_rows);
}

}  // namespace

FlatFit fit_mle(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                const EpochSink& sink) {
  detail::check_training_data(train, "fit_mle");
  detail::validate_config(config);
  const auto split = detail::split_rows(train.rows(), config.validation_fraction, config.seed);
  const Matrix fit_rows = train.select_rows(split.fit);
  const Matrix val_rows = train.select_rows(split.validation);
  const int dim = static_cast<int>(train.cols());
  FlatFit fit = run_sgd(fit_rows.rows(), val_rows, dim, arch, config, sink,
                        [&](const EmpiricalGenerator& gen, std::span<const std::size_t> idx, double& per_row) {
                          per_row = 1.0 / static_cast<double>(idx.size());
                          return mle_loss(gen, fit_rows.select_rows(idx), config.newton_tol);
                        });
  finish_report(fit, fit_rows, dim, config);
  return fit;
}

FlatFit fit_cvm_targets(const Matrix& points, std::span<const double> targets, const Matrix& validation,
                        const NetArchitecture& arch, const TrainConfig& config, const EpochSink& sink) {
  detail::check_training_data(points, "fit_cvm");
  if (targets.size() != points.rows()) throw ContractError("fit_cvm: one target per point required");
  if (validation.rows() > 0 && validation.cols() != points.cols())
    throw ContractError("fit_cvm: validation has the wrong number of columns");
  const int dim = static_cast<int>(points.cols());
  FlatFit fit = run_sgd(points.rows(), validation, dim, arch, config, sink,
                        [&](const EmpiricalGenerator& gen, std::span<const std::size_t> idx, double& per_row) {
                          std::vector<double> t(idx.size());
                          for (std::size_t i = 0; i < idx.size(); ++i) t[i] = targets[idx[i]];
                          // Stepped on the batch sum of squared residuals, like the
                          // summed likelihood; the trace keeps the mean.
                          LatentLoss ll = cvm_loss(gen, points.select_rows(idx), t, config.newton_tol);
                          const double n = static_cast<double>(idx.size());
                          ll.loss *= n;
                          for (auto& g : ll.grad) g *= n;
                          per_row = 1.0 / n;
                          return ll;
                        });
  finish_report(fit, points, dim, config);
  return fit;
}

FlatFit fit_cvm(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                const EpochSink& sink) {
  detail::check_training_data(train, "fit_cvm");
  detail::validate_config(config);
  const auto split = detail::split_rows(train.rows(), config.validation_fraction, config.seed);
  const Matrix fit_rows = train.select_rows(split.fit);
  const Matrix val_rows = train.select_rows(split.validation);
  const std::vector<double> targets = empirical_copula_at_rows(fit_rows);
  return fit_cvm_targets(fit_rows, targets, val_rows, arch, config, sink);
}

// ---------------------------------------------------------------------------
// Adversarial fit

DiscriminatorNet DiscriminatorNet::init(int dim, std::uint64_t seed) {
  if (dim < 1) throw DomainError("discriminator needs dim >= 1");
  DiscriminatorNet d;
  d.mlp_ = Mlp({dim, kHidden, 1}, 0.01);
  Rng rng = stream_rng(seed, 0xd15c);
  d.mlp_.init_uniform(rng);
  return d;
}

DiscriminatorNet::DiscriminatorNet(int dim, std::vector<double> params) : mlp_({dim, kHidden, 1}, 0.01) {
  if (params.size() != mlp_.param_count())
    throw ContractError("discriminator: expected " + std::to_string(mlp_.param_count()) +
                        " parameters, got " + std::to_string(params.size()));
  std::copy(params.begin(), params.end(), mlp_.params().begin());
}

double DiscriminatorNet::logit(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dim()) throw ContractError("discriminator: input has wrong width");
  std::vector<double> tape(mlp_.tape_size());
  mlp_.forward(u, tape);
  return tape.back();
}

double DiscriminatorNet::operator()(std::span<const double> u) const {
  const double z = logit(u);
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }
// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

FakeBatch make_fakes(const EmpiricalGenerator& gen, int dim, std::size_t rows, Rng& rng) {
  FakeBatch f;
  f.u = Matrix(rows, static_cast<std::size_t>(dim));
  f.exps.resize(rows * static_cast<std::size_t>(dim));
  f.pick.resize(rows);
  std::uniform_int_distribution<std::size_t> pick(0, gen.size() - 1);
  const auto m = gen.samples();
  for (std::size_t r = 0; r < rows; ++r) {
    f.pick[r] = pick(rng);
    for (int j = 0; j < dim; ++j) {
      const double e = unit_exponential(rng);
      f.exps[r * dim + j] = e;
      f.u(r, j) = gen.phi(e / m[f.pick[r]]);
    }
  }
  return f;
}

GanTrainer::GanTrainer(GeneratorNet gen, DiscriminatorNet disc, const TrainConfig& config)
    : gen_(std::move(gen)), disc_(std::move(disc)), config_(config),
      gen_opt_(gen_.param_count(), config.lr, config.adam_beta1, config.adam_beta2),
      disc_opt_(disc_.params().size(), config.lr, config.adam_beta1, config.adam_beta2) {
  Rng rng = stream_rng(config.seed, 0xc7);
  crn_eps_ = detail::draw_eps(config.latent_train, rng);
}

double GanTrainer::discriminator_step(const Matrix& real, Rng& rng) {
  const Mlp& mlp = disc_.mlp();
  const std::vector<double> eps =
      config_.common_random_numbers ? crn_eps_ : detail::draw_eps(config_.latent_train, rng);
  const SampleBatch sb = gen_.evaluate(eps);
  clamp_events_ += sb.clamp_events;
  const FakeBatch fake = make_fakes(EmpiricalGenerator(sb.m), disc_.dim(), real.rows(), rng);

  std::vector<double> grad(mlp.param_count(), 0.0), tape(mlp.tape_size());
  double loss = 0.0;
  const double n_real = static_cast<double>(real.rows()), n_fake = static_cast<double>(fake.u.rows());
  for (std::size_t r = 0; r < real.rows(); ++r) {
    mlp.forward(real.row(r), tape);
    const double z = tape.back();
    loss += softplus(-z) / n_real;
    const double dz[1] = {-sigmoid(-z) / n_real};
    mlp.backward(real.row(r), tape, dz, grad, {});
  }
  for (std::size_t r = 0; r < fake.u.rows(); ++r) {
    mlp.forward(fake.u.row(r), tape);
    const double z = tape.back();
    loss += softplus(z) / n_fake;
    const double dz[1] = {sigmoid(z) / n_fake};
    mlp.backward(fake.u.row(r), tape, dz, grad, {});
  }
  disc_opt_.step(disc_.params(), grad);
  return loss;
}

double GanTrainer::generator_loss(const GeneratorNet& gen, std::span<const double> latent_eps,
                                  const Matrix& exps, std::span<const std::size_t> pick,
                                  std::vector<double>* grad) const {
  const std::size_t rows = exps.rows(), d = exps.cols();
  if (pick.size() != rows) throw ContractError("generator_loss: one latent pick per row required");
  const SampleBatch sb = gen.evaluate(std::vector<double>(latent_eps.begin(), latent_eps.end()));
  const EmpiricalGenerator eg(sb.m);
  const auto m = eg.samples();
  const std::size_t L = m.size();
  const double inv_L = 1.0 / static_cast<double>(L);
  const Mlp& mlp = disc_.mlp();

  std::vector<double> tape(mlp.tape_size()), scratch(mlp.param_count()), du(d), u(d), x(d);
  std::vector<double> dm(L, 0.0);
  double loss = 0.0;
  const double n = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (pick[r] >= L) throw ContractError("generator_loss: latent pick out of range");
    const double M = m[pick[r]];
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = exps(r, j) / M;
      u[j] = eg.phi(x[j]);
    }
    mlp.forward(u, tape);
    const double z = tape.back();
    double dz;
    if (config_.minimax_generator_loss) {
      loss += -softplus(z) / n;  // log(1 - sigmoid(z))
      dz = -sigmoid(z) / n;
    } else {
      loss += softplus(-z) / n;  // -log sigmoid(z)
      dz = -sigmoid(-z) / n;
    }
    if (!grad) continue;
    const double dz_arr[1] = {dz};
    mlp.backward(u, tape, dz_arr, scratch, du);
    for (std::size_t j = 0; j < d; ++j) {
      // U = phi(E / M): transform samples enter through phi, M through x.
      double a1 = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double e = std::exp(std::max(-m[l] * x[j], -700.0));
        dm[l] += du[j] * (-x[j] * inv_L * e);
        a1 += m[l] * e;
      }
      a1 *= inv_L;
      dm[pick[r]] += du[j] * a1 * x[j] / M;
    }
  }
  if (grad) *grad = gen.backward(sb, dm);
  return loss;
}

double GanTrainer::generator_step(std::size_t rows, Rng& rng) {
  const std::vector<double> eps =
      config_.common_random_numbers ? crn_eps_ : detail::draw_eps(config_.latent_train, rng);
  const std::size_t d = static_cast<std::size_t>(disc_.dim());
  Matrix exps(rows, d);
  std::vector<std::size_t> pick(rows);
  std::uniform_int_distribution<std::size_t> pick_dist(0, eps.size() - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    pick[r] = pick_dist(rng);
    for (std::size_t j = 0; j < d; ++j) exps(r, j) = unit_exponential(rng);
  }
  std::vector<double> grad;
  const double loss = generator_loss(gen_, eps, exps, pick, &grad);
  clamp_events_ += gen_.evaluate(eps).clamp_events;
  gen_opt_.step(gen_.params(), grad);
  return loss;
}

GanFit fit_gan(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
               const EpochSink& sink) {
  detail::check_training_data(train, "fit_gan");
  detail::validate_config(config);
  const auto split = detail::split_rows(train.rows(), config.validation_fraction, config.seed);
  const Matrix fit_rows = train.select_rows(split.fit);
  const Matrix val_rows = train.select_rows(split.validation);
  const int dim = static_cast<int>(train.cols());

  GanTrainer trainer(GeneratorNet::init(arch, config.seed), DiscriminatorNet::init(dim, config.seed),
                     config);
  Rng rng = stream_rng(config.seed, 0x67616e);
  detail::BatchCycler batches(fit_rows.rows(), static_cast<std::size_t>(config.batch_size), rng);
  Monitor mon(val_rows, dim, config, sink);
  int saturated = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix real = fit_rows.select_rows(batches.next());
    const double d_loss = trainer.discriminator_step(real, rng);
    saturated = d_loss < 1e-6 ? saturated + 1 : 0;
    if (saturated >= 100) mon.warn("discriminator saturated: loss below 1e-6 for 100 consecutive epochs");
    const double g_loss = trainer.generator_step(real.rows(), rng);
    mon.record(epoch, g_loss, 0, trainer.generator());
  }
  mon.report().clamp_events = trainer.clamp_events();
  GanFit fit{mon.finish(trainer.generator()), trainer.discriminator(), std::move(mon.report())};
  FlatFit tmp{fit.net, {}};
  finish_report(tmp, fit_rows, dim, config);
  fit.report.train_nll = tmp.report.train_nll;
  return fit;
}

FlatFit fit_flat(const Matrix& train, const NetArchitecture& arch, const TrainConfig& config,
                 const EpochSink& sink) {
  switch (config.method) {
    case Method::Mle: return fit_mle(train, arch, config, sink);
    case Method::Cvm: return fit_cvm(train, arch, config, sink);
    case Method::Gan: {
      GanFit g = fit_gan(train, arch, config, sink);
      return FlatFit{std::move(g.net), std::move(g.report)};
    }
  }
  throw DomainError("unknown training method");
}

}  // namespace copula_forge
