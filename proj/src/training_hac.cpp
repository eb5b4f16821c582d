#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "copula_forge/bell.hpp"
#include "copula_forge/detail/parallel.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/optim.hpp"
#include "copula_forge/stats.hpp"
#include "copula_forge/training.hpp"
#include "training_detail.hpp"

namespace copula_forge {

OuterChoice parse_outer(std::string_view text) {
  OuterChoice c;
  if (text == "gen" || text == "generative") return c;
  c.kind = OuterKind::Parametric;
  const auto colon = text.find(':');
  c.family = parse_family(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    const std::string num(text.substr(colon + 1));
    std::size_t used = 0;
    double theta = 0.0;
    try {
      theta = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) throw DomainError("outer: cannot parse theta in '" + std::string(text) + "'");
    ParametricGenerator check(c.family, theta);  // range check
    c.theta = theta;
  }
  return c;
}

Matrix collapse_blocks(const Matrix& data, const std::vector<std::vector<int>>& structure) {
  Matrix v(data.rows(), structure.size());
  for (std::size_t j = 0; j < structure.size(); ++j) {
    std::vector<std::size_t> cols(structure[j].begin(), structure[j].end());
    const Matrix block = data.select_cols(cols);
    const auto c = kernels::parallel::empirical_copula_rows(block, block);
    for (std::size_t r = 0; r < data.rows(); ++r) v(r, j) = c[r];
  }
  return v;
}

namespace {

void check_structure(const std::vector<std::vector<int>>& structure, std::size_t dim) {
  if (structure.size() < 2) throw DomainError("hierarchical fit needs at least two children");
  std::vector<int> seen(dim, 0);
  for (const auto& block : structure) {
    if (block.empty()) throw DomainError("structure has an empty child");
    for (int v : block) {
      if (v < 0 || static_cast<std::size_t>(v) >= dim)
        throw DomainError("structure names column " + std::to_string(v) + " outside the data");
      if (seen[v]++) throw DomainError("structure lists column " + std::to_string(v) + " twice");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw DomainError("structure does not cover every column");
}

std::pair<double, double> theta_search_range(Family f) {
  switch (f) {
    case Family::Joe:
    case Family::Gumbel:
    case Family::Nelsen12: return {1.0, 50.0};
    default: return {1e-3, 50.0};
  }
}

}  // namespace

double fit_theta_cvm(Family family, const Matrix& points, std::span<const double> targets) {
  if (targets.size() != points.rows()) throw ContractError("fit_theta_cvm: one target per point required");
  auto loss = [&](double log_theta) {
    const AcModel model(ParametricGenerator(family, std::exp(log_theta)), static_cast<int>(points.cols()));
    return cvm_distance(kernels::parallel::cdf_rows(model, points), targets);
  };
  auto [lo_theta, hi_theta] = theta_search_range(family);
  double a = std::log(lo_theta), b = std::log(hi_theta);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = loss(c), fd = loss(d);
  for (int it = 0; it < 80 && b - a > 1e-7; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = loss(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = loss(d);
    }
  }
  return std::exp(0.5 * (a + b));
}

GeneratorSpec fit_hac_outer(const Matrix& train, const std::vector<std::vector<int>>& structure,
                            const OuterChoice& outer, const NetArchitecture& arch,
                            const TrainConfig& config, FitReport& report, const EpochSink& sink) {
  check_structure(structure, train.cols());
  if (outer.kind == OuterKind::Parametric && outer.theta) return ParametricGenerator(outer.family, *outer.theta);

  const auto start = std::chrono::steady_clock::now();
  const Matrix v = collapse_blocks(train, structure);
  const std::vector<double> targets = empirical_copula_at_rows(train);
  if (outer.kind == OuterKind::Parametric) {
    const double theta = fit_theta_cvm(outer.family, v, targets);
    report = FitReport{};
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return ParametricGenerator(outer.family, theta);
  }
  detail::validate_config(config);
  const auto split = detail::split_rows(train.rows(), config.validation_fraction, config.seed);
  std::vector<double> fit_targets;
  for (std::size_t i : split.fit) fit_targets.push_back(targets[i]);
  FlatFit fit = fit_cvm_targets(v.select_rows(split.fit), fit_targets, v.select_rows(split.validation), arch,
                                config, sink);
  report = std::move(fit.report);
  return std::move(fit.net);
}

// ---------------------------------------------------------------------------
// Child likelihood

namespace {

// Derivatives of psi^(n)(t) with respect to (mu_raw, beta_raw, m_1..m_L).
void psi_param_grad(const Subordinator& sub, int n, double t, std::span<double> out) {
  const double mu = sub.mu(), beta = sub.beta();
  const EmpiricalGenerator& jumps = sub.jumps();
  out[0] = n == 0 ? mu * t : (n == 1 ? mu : 0.0);
  out[1] = n == 0 ? beta * (1.0 - jumps.phi(t)) : -beta * jumps.deriv(n, t);
  const auto g = jumps.sample_grads(n, t);
  for (std::size_t l = 0; l < g.size(); ++l) out[2 + l] = -beta * g[l];
}

}  // namespace

double hac_child_batch_loss(const Generator& outer, const SubordinatorSpec& spec, std::span<const double> eps,
                            const Matrix& a_block, std::vector<double>* grad, std::size_t* failures) {
  const std::size_t n = a_block.rows();
  const int k = static_cast<int>(a_block.cols());
  if (k < 2) throw DomainError("child likelihood needs at least two columns");
  if (k + 1 > HacModel::kMaxOrder) throw UnsupportedError("child dimension too large for the composed derivatives");
  const SampleBatch sb = spec.jump_net.evaluate(std::vector<double>(eps.begin(), eps.end()));
  const Subordinator sub(spec.mu(), spec.beta(), EmpiricalGenerator(sb.m));
  const std::size_t L = sb.m.size(), P = L + 2;

  std::vector<double> loss(n, 0.0), pgrad(grad ? n * P : 0, 0.0);
  std::vector<char> ok(n, 0);
  detail::parallel_for(n, [&](std::size_t r) {
    std::vector<double> y(k);
    try {
      for (int i = 0; i < k; ++i) y[i] = sub.psi_inv(a_block(r, i));
    } catch (const SolverError&) {
      return;
    }
    const double x = std::accumulate(y.begin(), y.end(), 0.0);
    std::vector<double> D(k + 2);  // D[m] = psi^(m)(x)
    for (int m = 0; m <= k + 1; ++m) D[m] = sub.psi_deriv(m, x);
    const double z = D[0];
    std::vector<double> O(k + 2);  // O[i] = phi_0^(i)(z)
    for (int i = 1; i <= k + 1; ++i) O[i] = outer.deriv(i, z);
    const BellTable bell(std::span<const double>(D.data() + 1, k), k);
    double G = 0.0, Gz = 0.0;
    std::vector<double> GD(k + 1, 0.0);
    for (int i = 1; i <= k; ++i) {
      G += O[i] * bell(k, i);
      Gz += O[i + 1] * bell(k, i);
      for (int m = 1; m <= k - i + 1; ++m) GD[m] += O[i] * bell.partial(k, i, m);
    }
    std::vector<double> slope(k);
    double log_den = 0.0;
    for (int i = 0; i < k; ++i) {
      slope[i] = sub.psi_deriv(1, y[i]);
      log_den += std::log(slope[i]);
    }
    if (!(std::isfinite(G) && G != 0.0 && std::isfinite(log_den))) return;
    loss[r] = -(std::log(std::abs(G)) - log_den);
    ok[r] = 1;
    if (!grad) return;

    std::vector<double> tmp(P), dx(P, 0.0), dlog(P, 0.0);
    std::vector<std::vector<double>> dy(k, std::vector<double>(P));
    for (int i = 0; i < k; ++i) {
      psi_param_grad(sub, 0, y[i], tmp);
      for (std::size_t p = 0; p < P; ++p) {
        dy[i][p] = -tmp[p] / slope[i];
        dx[p] += dy[i][p];
      }
    }
    // d log|G|
    psi_param_grad(sub, 0, x, tmp);
    for (std::size_t p = 0; p < P; ++p) dlog[p] += Gz * (D[1] * dx[p] + tmp[p]) / G;
    for (int m = 1; m <= k; ++m) {
      if (GD[m] == 0.0) continue;
      psi_param_grad(sub, m, x, tmp);
      for (std::size_t p = 0; p < P; ++p) dlog[p] += GD[m] * (D[m + 1] * dx[p] + tmp[p]) / G;
    }
    // minus d log psi'(y_i)
    for (int i = 0; i < k; ++i) {
      const double curv = sub.psi_deriv(2, y[i]);
      psi_param_grad(sub, 1, y[i], tmp);
      for (std::size_t p = 0; p < P; ++p) dlog[p] -= (curv * dy[i][p] + tmp[p]) / slope[i];
    }
    double* out = pgrad.data() + r * P;
    for (std::size_t p = 0; p < P; ++p) out[p] = -dlog[p];
  });

  double total = 0.0;
  std::size_t failed = 0;
  std::vector<double> sum(P, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (!ok[r]) {
      ++failed;
      continue;
    }
    total += loss[r];
    if (grad)
      for (std::size_t p = 0; p < P; ++p) sum[p] += pgrad[r * P + p];
  }
  if (failures) *failures = failed;
  if (grad) {
    const std::vector<double> net_grad =
        spec.jump_net.backward(sb, std::span<const double>(sum.data() + 2, L));
    grad->assign(2 + net_grad.size(), 0.0);
    (*grad)[0] = sum[0];
    (*grad)[1] = sum[1];
    std::copy(net_grad.begin(), net_grad.end(), grad->begin() + 2);
  }
  return total;
}

namespace {

Matrix outer_inverse(const Generator& outer, const Matrix& block) {
  Matrix a(block.rows(), block.cols());
  detail::parallel_for(block.rows(), [&](std::size_t r) {
    for (std::size_t c = 0; c < block.cols(); ++c) {
      double u = block(r, c);
      clip_to_interior(std::span<double>(&u, 1));
      a(r, c) = outer.phi_inv(u);
    }
  });
  return a;
}

double child_nll(const Generator& outer, const SubordinatorSpec& spec, const Matrix& block,
                 std::size_t latent_count, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0xc41d);
  const std::size_t k = block.cols();
  // A two-child model whose first child is this one; the second is a
  // placeholder singleton that child_log_density never touches.
  std::vector<int> vars(k);
  std::iota(vars.begin(), vars.end(), 0);
  std::vector<HacChild> children;
  children.push_back(HacChild{Subordinator::freeze(spec, latent_count, rng), vars});
  children.push_back(HacChild{Subordinator(1.0, 1.0, EmpiricalGenerator({1.0})), {static_cast<int>(k)}});
  const HacModel model(outer, std::move(children));
  std::vector<double> ld(block.rows());
  detail::parallel_for(block.rows(), [&](std::size_t r) {
    std::vector<double> u(block.row(r).begin(), block.row(r).end());
    clip_to_interior(u);
    ld[r] = model.child_log_density(0, u);
  });
  double s = 0.0;
  for (double v : ld) s += v;
  return -s / static_cast<double>(ld.size());
}

}  // namespace

SubordinatorSpec fit_hac_child(const Generator& outer, const Matrix& block, const NetArchitecture& arch,
                               const TrainConfig& config, FitReport& report, const EpochSink& sink) {
  detail::validate_config(config);
  if (block.cols() < 2) throw DomainError("fit_hac_child: a child needs at least two columns");
  if (block.rows() < 1) throw DomainError("fit_hac_child: no rows");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const auto split = detail::split_rows(block.rows(), config.validation_fraction, config.seed);
  const Matrix fit_rows = block.select_rows(split.fit);
  const Matrix val_rows = block.select_rows(split.validation);
  const Matrix a = outer_inverse(outer, fit_rows);

  SubordinatorSpec spec{0.0, 0.0, GeneratorNet::init(arch, config.seed)};
  std::vector<double> theta(2 + spec.jump_net.param_count());
  SgdMomentum opt(theta.size(), config.lr, config.momentum);
  Rng rng = stream_rng(config.seed, 0x6863);
  detail::BatchCycler batches(fit_rows.rows(), static_cast<std::size_t>(config.batch_size), rng);
  const std::vector<double> crn = detail::draw_eps(config.latent_train, rng);
  const std::uint64_t eval_seed = splitmix64(config.seed ^ 0xe7a1ULL);

  report = FitReport{};
  report.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
  std::optional<SubordinatorSpec> best;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto idx = batches.next();
    const std::vector<double> eps =
        config.common_random_numbers ? crn : detail::draw_eps(config.latent_train, rng);
    report.clamp_events += spec.jump_net.evaluate(eps).clamp_events;
    std::vector<double> grad;
    std::size_t failed = 0;
    const double loss = hac_child_batch_loss(outer, spec, eps, a.select_rows(idx), &grad, &failed);
    const std::size_t solves = idx.size() * block.cols();
    if (static_cast<double>(failed) > config.max_failure_rate * static_cast<double>(idx.size()))
      throw SolverError("child fit: " + std::to_string(failed) + " of " + std::to_string(idx.size()) +
                        " rows failed at epoch " + std::to_string(epoch) + " (" + std::to_string(solves) +
                        " inversions)");
    report.solver_failures += failed;

    if (std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
      theta[0] = spec.mu_raw;
      theta[1] = spec.beta_raw;
      const auto p = spec.jump_net.params();
      std::copy(p.begin(), p.end(), theta.begin() + 2);
      opt.step(theta, grad);
      spec.mu_raw = theta[0];
      spec.beta_raw = theta[1];
      std::copy(theta.begin() + 2, theta.end(), spec.jump_net.params().begin());
    } else if (std::find(report.warnings.begin(), report.warnings.end(), "non-finite gradient; step skipped") ==
               report.warnings.end()) {
      report.warnings.push_back("non-finite gradient; step skipped");
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss / static_cast<double>(idx.size());
    rec.solver_failures = failed;
    report.loss_trace.push_back(rec.loss);
    const bool due = (epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs;
    if (val_rows.rows() > 0 && due) {
      rec.val_nll = child_nll(outer, spec, val_rows, config.latent_eval, eval_seed);
      if (std::isfinite(rec.val_nll) && (report.best_epoch < 0 || rec.val_nll < report.best_val_nll)) {
        report.best_val_nll = rec.val_nll;
        report.best_epoch = epoch;
        best = spec;
      }
    }
    rec.wall_seconds = elapsed();
    if (!std::isnan(rec.val_nll)) report.evaluations.push_back(rec);
    if (sink) sink(rec);
  }
  if (best) spec = *best;
  report.train_nll = child_nll(outer, spec, fit_rows, config.latent_eval, eval_seed);
  report.wall_seconds = elapsed();
  return spec;
}

HacFit fit_hac(const Matrix& train, const std::vector<std::vector<int>>& structure, const OuterChoice& outer,
               const TrainConfig& outer_config, const TrainConfig& child_config, const NetArchitecture& arch,
               const EpochSink& sink) {
  check_structure(structure, train.cols());
  for (std::size_t r = 0; r < train.rows(); ++r)
    for (double v : train.row(r))
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("fit_hac: data must lie in [0, 1]");

  HacFit fit;
  fit.spec.latent = LatentCounts{child_config.latent_train, child_config.latent_eval};
  fit.spec.outer = fit_hac_outer(train, structure, outer, arch, outer_config, fit.outer_report, sink);

  // Stage two sees the outer only through this frozen evaluation generator.
  const std::uint64_t before = param_hash(fit.spec.outer);
  Rng rng = stream_rng(outer_config.seed, 0x0f7e);
  const Generator frozen = freeze_generator(fit.spec.outer, outer_config.latent_eval, rng);

  for (std::size_t j = 0; j < structure.size(); ++j) {
    HacChildSpec child;
    child.vars = structure[j];
    FitReport rep;
    TrainConfig cfg = child_config;
    cfg.seed = splitmix64(child_config.seed + 0x9e37 * (j + 1));
    if (structure[j].size() >= 2) {
      std::vector<std::size_t> cols(structure[j].begin(), structure[j].end());
      child.sub = fit_hac_child(frozen, train.select_cols(cols), arch, cfg, rep, sink);
    } else {
      child.sub = SubordinatorSpec{0.0, 0.0, GeneratorNet::init(arch, cfg.seed)};
    }
    fit.spec.children.push_back(std::move(child));
    fit.child_reports.push_back(std::move(rep));
  }
  if (param_hash(fit.spec.outer) != before) throw ContractError("stage two modified the outer generator");
  return fit;
}

}  // namespace copula_forge
