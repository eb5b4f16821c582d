#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "copula_forge/data_io.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/model.hpp"
#include "copula_forge/parametric.hpp"
#include "copula_forge/stats.hpp"
#include "copula_forge/training.hpp"

using namespace copula_forge;

namespace {

Matrix outer_inverse(const Generator& outer, const Matrix& u) {
  Matrix a(u.rows(), u.cols());
  for (std::size_t r = 0; r < u.rows(); ++r)
    for (std::size_t c = 0; c < u.cols(); ++c) a(r, c) = outer.phi_inv(u(r, c));
  return a;
}

HacSynth nested_clayton() {
  return HacSynth{Family::Clayton, 1.0, {{Family::Clayton, 3.0, {0, 1}}, {Family::Clayton, 8.0, {2, 3}}}};
}

TrainConfig short_config(Method m, int epochs) {
  TrainConfig c = TrainConfig::defaults(m);
  c.epochs = epochs;
  c.eval_every = 10;
  c.latent_eval = 200;
  return c;
}

}  // namespace

TEST(TrainingHac, ParseOuter) {
  EXPECT_EQ(parse_outer("gen").kind, OuterKind::Generative);
  const OuterChoice fitted = parse_outer("frank");
  EXPECT_EQ(fitted.kind, OuterKind::Parametric);
  EXPECT_EQ(fitted.family, Family::Frank);
  EXPECT_FALSE(fitted.theta.has_value());
  const OuterChoice fixed = parse_outer("clayton:2.5");
  EXPECT_EQ(fixed.family, Family::Clayton);
  EXPECT_EQ(fixed.theta, 2.5);
  EXPECT_THROW(parse_outer("clayton:x"), DomainError);
  EXPECT_THROW(parse_outer("clayton:-1"), DomainError);
  EXPECT_THROW(parse_outer("gauss"), UnsupportedError);
}

TEST(TrainingHac, CollapseBlocksUsesBlockEmpiricalCopula) {
  const Matrix data = synth(nested_clayton(), 200, 1);
  const std::vector<std::vector<int>> structure = {{0, 1}, {2}, {3}};
  const Matrix v = collapse_blocks(data, structure);
  ASSERT_EQ(v.cols(), 3u);
  const std::vector<std::size_t> first = {0, 1};
  const Matrix block = data.select_cols(first);
  for (std::size_t r = 0; r < data.rows(); r += 17) {
    EXPECT_EQ(v(r, 0), empirical_copula(block, block.row(r)));
    // A single column collapses to its empirical cdf, rank / N.
    std::size_t below = 0;
    for (std::size_t k = 0; k < data.rows(); ++k) below += data(k, 2) <= data(r, 2);
    EXPECT_EQ(v(r, 1), static_cast<double>(below) / data.rows());
  }
}

// The search must land on the minimum of the objective; brute force over a
// fine grid is the oracle.
TEST(TrainingHac, ThetaByMinimumDistance) {
  struct Case {
    Family family;
    double theta, lo, hi;
  };
  for (const Case& c : {Case{Family::Clayton, 2.0, 0.05, 20.0}, Case{Family::Frank, 8.0, 0.1, 40.0}}) {
    const Matrix data = AcModel(ParametricGenerator(c.family, c.theta), 2).sample(1500, 2);
    const auto targets = empirical_copula_at_rows(data);
    auto loss = [&](double th) {
      const AcModel m(ParametricGenerator(c.family, th), 2);
      return cvm_distance(kernels::parallel::cdf_rows(m, data), targets);
    };
    const double fitted = fit_theta_cvm(c.family, data, targets);
    double grid_best = loss(c.lo);
    for (int i = 1; i <= 400; ++i) grid_best = std::min(grid_best, loss(c.lo * std::pow(c.hi / c.lo, i / 400.0)));
    EXPECT_LE(loss(fitted), grid_best + 1e-12) << to_string(c.family);
    // Same dependence direction and rough strength as the truth.
    const double tau_fit = ParametricGenerator(c.family, fitted).kendall_tau();
    EXPECT_NEAR(tau_fit, ParametricGenerator(c.family, c.theta).kendall_tau(), 0.1) << to_string(c.family);
  }
}

TEST(TrainingHac, ChildGradientMatchesFiniteDifferences) {
  const Generator outer(ParametricGenerator(Family::Clayton, 1.0));
  for (int k : {2, 3}) {
    Rng rng = stream_rng(3, k);
    Matrix u(30, k);
    for (auto& v : u.data()) v = uniform_open(rng);
    const Matrix a = outer_inverse(outer, u);
    const SubordinatorSpec spec{0.3, -0.2, GeneratorNet::init(NetArchitecture{}, 9)};
    std::vector<double> eps(50);
    for (auto& e : eps) e = uniform_open(rng);
    std::vector<double> grad;
    hac_child_batch_loss(outer, spec, eps, a, &grad);
    ASSERT_EQ(grad.size(), 2 + spec.jump_net.param_count());
    std::vector<std::size_t> which = {0, 1};
    for (int i = 0; i < 5; ++i) which.push_back(2 + rng() % spec.jump_net.param_count());
    for (std::size_t p : which) {
      auto bumped = [&](double d) {
        SubordinatorSpec s = spec;
        if (p == 0) s.mu_raw += d;
        else if (p == 1) s.beta_raw += d;
        else s.jump_net.params()[p - 2] += d;
        return hac_child_batch_loss(outer, s, eps, a, nullptr);
      };
      const double h = 1e-5;
      const double fd = (bumped(h) - bumped(-h)) / (2 * h);
      EXPECT_NEAR(grad[p], fd, 1e-3 * std::abs(fd) + 1e-6) << "k=" << k << " p=" << p;
    }
  }
}

// Differences of the child loss equal differences of the child NLL under the
// corresponding hierarchical model.
TEST(TrainingHac, ChildLossTracksChildDensity) {
  const Generator outer(ParametricGenerator(Family::Clayton, 1.0));
  const Matrix u = synth(nested_clayton(), 40, 5);
  const std::vector<std::size_t> cols = {0, 1};
  const Matrix block = u.select_cols(cols);
  const Matrix a = outer_inverse(outer, block);
  Rng rng = stream_rng(4, 4);
  std::vector<double> eps(60);
  for (auto& e : eps) e = uniform_open(rng);
  auto child_nll_sum = [&](const SubordinatorSpec& s) {
    const Subordinator sub(s.mu(), s.beta(), EmpiricalGenerator(s.jump_net.evaluate(eps).m));
    const Subordinator other(1.0, 1.0, EmpiricalGenerator({1.0}));
    const HacModel model(outer, {{sub, {0, 1}}, {other, {2}}});
    double total = 0.0;
    for (std::size_t r = 0; r < block.rows(); ++r) total -= model.child_log_density(0, block.row(r));
    return total;
  };
  const SubordinatorSpec s1{0.0, 0.0, GeneratorNet::init(NetArchitecture{}, 1)};
  const SubordinatorSpec s2{0.5, -1.0, GeneratorNet::init(NetArchitecture{}, 2)};
  const double d_loss = hac_child_batch_loss(outer, s1, eps, a, nullptr) - hac_child_batch_loss(outer, s2, eps, a, nullptr);
  EXPECT_NEAR(d_loss, child_nll_sum(s1) - child_nll_sum(s2), 1e-8 * std::max(1.0, std::abs(d_loss)));
}

TEST(TrainingHac, StageTwoLeavesOuterUntouched) {
  const Matrix data = synth(nested_clayton(), 300, 6);
  const std::vector<std::vector<int>> structure = {{0, 1}, {2, 3}};
  const TrainConfig oc = short_config(Method::Cvm, 20);
  const TrainConfig cc = short_config(Method::Mle, 20);
  FitReport rep;
  const GeneratorSpec outer_alone = fit_hac_outer(data, structure, OuterChoice{}, NetArchitecture{}, oc, rep);
  const HacFit fit = fit_hac(data, structure, OuterChoice{}, oc, cc);
  EXPECT_EQ(fit.spec.outer, outer_alone);
  EXPECT_EQ(param_hash(fit.spec.outer), param_hash(outer_alone));
  ASSERT_EQ(fit.child_reports.size(), 2u);
  EXPECT_EQ(fit.child_reports[0].loss_trace.size(), 20u);
  EXPECT_EQ(fit.spec.dim(), 4);
  EXPECT_TRUE(fit_hac(data, structure, OuterChoice{}, oc, cc).spec == fit.spec);
}

TEST(TrainingHac, FixedParametricOuterAndSingletons) {
  const Matrix data = synth(nested_clayton(), 300, 7);
  const HacFit fit = fit_hac(data, {{0, 1, 2}, {3}}, parse_outer("clayton:1"), short_config(Method::Cvm, 5),
                             short_config(Method::Mle, 10));
  EXPECT_EQ(fit.spec.outer, GeneratorSpec(ParametricGenerator(Family::Clayton, 1.0)));
  EXPECT_EQ(fit.child_reports[0].loss_trace.size(), 10u);
  EXPECT_TRUE(fit.child_reports[1].loss_trace.empty());
}

TEST(TrainingHac, IndependentChildrenGiveNearIndependentOuter) {
  // Two independent Clayton pairs.
  const Matrix left = AcModel(ParametricGenerator(Family::Clayton, 3.0), 2).sample(1500, 8);
  const Matrix right = AcModel(ParametricGenerator(Family::Clayton, 3.0), 2).sample(1500, 9);
  Matrix data(1500, 4);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    data(r, 0) = left(r, 0), data(r, 1) = left(r, 1);
    data(r, 2) = right(r, 0), data(r, 3) = right(r, 1);
  }
  const std::vector<std::vector<int>> structure = {{0, 1}, {2, 3}};
  FitReport rep;
  const GeneratorSpec par = fit_hac_outer(data, structure, parse_outer("clayton"), NetArchitecture{},
                                          short_config(Method::Cvm, 1), rep);
  EXPECT_LT(std::abs(std::get<ParametricGenerator>(par).kendall_tau()), 0.05);

  TrainConfig oc = short_config(Method::Cvm, 500);
  oc.eval_every = 100;
  const GeneratorSpec gen = fit_hac_outer(data, structure, OuterChoice{}, NetArchitecture{}, oc, rep);
  const AcModel outer2 = instantiate(AcSpec{gen, 2, {}}, 1000, 3);
  const Matrix s = outer2.sample(4000, 4);
  EXPECT_LT(std::abs(kernels::parallel::kendall_tau(s.column(0), s.column(1))), 0.05);
}

TEST(TrainingHac, StructureValidation) {
  const Matrix data = synth(nested_clayton(), 50, 8);
  const TrainConfig c = short_config(Method::Cvm, 1);
  EXPECT_THROW(fit_hac(data, {{0, 1, 2, 3}}, OuterChoice{}, c, c), DomainError);
  EXPECT_THROW(fit_hac(data, {{0, 1}, {1, 2, 3}}, OuterChoice{}, c, c), DomainError);
  EXPECT_THROW(fit_hac(data, {{0, 1}, {2}}, OuterChoice{}, c, c), DomainError);
  EXPECT_THROW(fit_hac(data, {{0, 1}, {2, 7}}, OuterChoice{}, c, c), DomainError);
}
