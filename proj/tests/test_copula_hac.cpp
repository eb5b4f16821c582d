#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/copula_hac.hpp"
#include "copula_forge/errors.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/parametric.hpp"
#include "copula_forge/stats.hpp"

using namespace copula_forge;

namespace {

EmpiricalGenerator gamma_eg(double shape, std::size_t L, std::uint64_t seed) {
  Rng rng = stream_rng(seed, 0);
  std::vector<double> m(L);
  for (auto& v : m) v = sample_gamma(shape, rng);
  return EmpiricalGenerator(m);
}

HacModel make_hac(Generator outer, std::vector<std::vector<int>> blocks) {
  std::vector<HacChild> children;
  for (std::size_t j = 0; j < blocks.size(); ++j)
    children.push_back({Subordinator(0.5 + j, 1.0 + 2.0 * j, gamma_eg(1.0 + j, 50, 10 + j)), blocks[j]});
  return HacModel(std::move(outer), std::move(children));
}

}  // namespace

TEST(Subordinator, PsiValuesAndInverse) {
  const Subordinator s(0.7, 2.0, EmpiricalGenerator({1.0, 3.0}));
  const double x = 0.4;
  EXPECT_NEAR(s.psi(x), 0.7 * x + 2.0 * (1 - 0.5 * (std::exp(-x) + std::exp(-3 * x))), 1e-15);
  EXPECT_NEAR(s.psi_deriv(1, x), 0.7 + 2.0 * 0.5 * (std::exp(-x) + 3 * std::exp(-3 * x)), 1e-14);
  EXPECT_NEAR(s.psi_deriv(2, x), -2.0 * 0.5 * (std::exp(-x) + 9 * std::exp(-3 * x)), 1e-14);
  for (double a : {1e-8, 0.1, 1.0, 50.0}) EXPECT_NEAR(s.psi(s.psi_inv(a)), a, 1e-10 * std::max(1.0, a));
  EXPECT_THROW(Subordinator(0.0, 1.0, EmpiricalGenerator({1.0})), DomainError);
}

TEST(Subordinator, SampleMatchesLaplaceExponent) {
  // E[exp(-x Lambda(t))] = exp(-t psi(x)).
  const Subordinator s(0.3, 1.5, gamma_eg(2.0, 40, 3));
  Rng rng = stream_rng(1, 1);
  const int n = 200000;
  const double t = 1.3;
  std::vector<double> lam(n);
  for (auto& v : lam) v = s.sample(t, rng);
  for (double x : {0.2, 1.0, 3.0}) {
    double acc = 0.0;
    for (double v : lam) acc += std::exp(-x * v);
    EXPECT_NEAR(acc / n, std::exp(-t * s.psi(x)), 0.004) << "x=" << x;
  }
}

TEST(CopulaHac, InnerDerivativesMatchFiniteDifferences) {
  const HacModel model = make_hac(ParametricGenerator(Family::Clayton, 1.5), {{0, 1}, {2, 3, 4}});
  for (std::size_t j = 0; j < 2; ++j)
    for (int k = 1; k <= 5; ++k)
      for (double x : {0.2, 1.0, 4.0}) {
        const double h = 1e-4 * std::max(1.0, x);
        const double fd = (model.inner_phi_deriv(j, k - 1, x + h) - model.inner_phi_deriv(j, k - 1, x - h)) / (2 * h);
        EXPECT_NEAR(model.inner_phi_deriv(j, k, x), fd, 1e-5 * std::max(1.0, std::abs(fd)))
            << "j=" << j << " k=" << k << " x=" << x;
      }
}

TEST(CopulaHac, InnerGeneratorIsCompletelyMonotone) {
  const HacModel model = make_hac(gamma_eg(0.5, 200, 4), {{0, 1, 2}, {3, 4}});
  for (std::size_t j = 0; j < 2; ++j)
    for (int k = 0; k <= HacModel::kMaxOrder; ++k)
      for (double x : {0.01, 0.5, 3.0, 30.0})
        EXPECT_GE((k % 2 == 0 ? 1.0 : -1.0) * model.inner_phi_deriv(j, k, x), 0.0) << "k=" << k << " x=" << x;
}

TEST(CopulaHac, PureDriftReducesToOuterCopula) {
  // With negligible jumps psi(x) = mu x, and phi_0(mu x) generates the same
  // copula as phi_0, so the whole model collapses to a flat one.
  const ParametricGenerator outer(Family::Clayton, 2.0);
  std::vector<HacChild> ch;
  ch.push_back({Subordinator(1.7, 1e-13, EmpiricalGenerator({1.0})), {0, 1}});
  ch.push_back({Subordinator(0.4, 1e-13, EmpiricalGenerator({1.0})), {2}});
  const HacModel hac(outer, ch);
  const AcModel flat(outer, 3);
  Rng rng = stream_rng(2, 2);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> u = {uniform_open(rng), uniform_open(rng), uniform_open(rng)};
    EXPECT_NEAR(hac.cdf(u), flat.cdf(u), 1e-10);
    const std::vector<double> block = {u[0], u[1]};
    const AcModel pair(outer, 2);
    EXPECT_NEAR(hac.child_log_density(0, block), pair.log_density(block), 1e-7);
  }
}

TEST(CopulaHac, CdfBoundsAndMargins) {
  const HacModel model = make_hac(ParametricGenerator(Family::Frank, 4.0), {{0, 2}, {1, 3}});
  Rng rng = stream_rng(6, 6);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> u(4);
    for (auto& v : u) v = uniform_open(rng);
    const double c = model.cdf(u);
    EXPECT_LE(c, *std::min_element(u.begin(), u.end()) + 1e-12);
    EXPECT_GE(c, std::max(u[0] + u[1] + u[2] + u[3] - 3.0, 0.0) - 1e-12);
  }
  const std::vector<double> m = {1.0, 0.37, 1.0, 1.0};
  EXPECT_NEAR(model.cdf(m), 0.37, 1e-9);
}

TEST(CopulaHac, ChildDensityIsMixedPartialOfChildCdf) {
  const HacModel model = make_hac(gamma_eg(0.7, 100, 7), {{0, 1}, {2, 3}});
  const double h = 1e-4;
  for (std::size_t j = 0; j < 2; ++j)
    for (double a : {0.3, 0.7})
      for (double b : {0.2, 0.8}) {
        auto C = [&](double x, double y) {
          const std::vector<double> p = {x, y};
          return model.child_cdf(j, p);
        };
        const double fd = (C(a + h, b + h) - C(a + h, b - h) - C(a - h, b + h) + C(a - h, b - h)) / (4 * h * h);
        const std::vector<double> p = {a, b};
        EXPECT_NEAR(std::exp(model.child_log_density(j, p)), fd, 1e-4 * std::max(1.0, fd));
      }
}

TEST(CopulaHac, SamplerAgreesWithCdf) {
  const HacModel model = make_hac(gamma_eg(0.5, 200, 8), {{0, 1}, {2, 3}});
  const Matrix s = model.sample(10000, 5);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_LT(ks_uniform(s.column(c)), ks_critical_value(10000, 0.01));
  const auto mc = kernels::parallel::cdf_rows(model, s);
  const auto emp = kernels::parallel::empirical_copula_rows(s, s);
  EXPECT_LE(cvm_distance(mc, emp), 5e-4);
}

TEST(CopulaHac, WithinChildDependenceDominates) {
  const HacModel model = make_hac(ParametricGenerator(Family::Clayton, 1.0), {{0, 1}, {2, 3}});
  const Matrix s = model.sample(3000, 9);
  const Matrix tau = kernels::parallel::kendall_tau_matrix(s);
  EXPECT_GT(tau(0, 1), tau(0, 2));
  EXPECT_GT(tau(2, 3), tau(1, 3));
  EXPECT_NEAR(tau(0, 2), 1.0 / 3.0, 0.04);  // cross-child pairs follow the outer Clayton(1)
}

TEST(CopulaHac, PartitionValidation) {
  auto sub = [] { return Subordinator(1.0, 1.0, EmpiricalGenerator({1.0})); };
  const ParametricGenerator outer(Family::Clayton, 1.0);
  EXPECT_THROW(HacModel(outer, {{sub(), {0, 1}}}), DomainError);
  EXPECT_THROW(HacModel(outer, {{sub(), {0, 1}}, {sub(), {1, 2}}}), DomainError);
  EXPECT_THROW(HacModel(outer, {{sub(), {0, 1}}, {sub(), {3}}}), DomainError);
  EXPECT_THROW(HacModel(outer, {{sub(), {0}}, {sub(), {}}}), DomainError);
  EXPECT_THROW(HacModel(outer, {{sub(), {0, 1, 2, 3, 4, 5, 6, 7, 8}}, {sub(), {9}}}), UnsupportedError);
  EXPECT_NO_THROW(HacModel(outer, {{sub(), {1, 0}}, {sub(), {2}}}));
}

TEST(CopulaHac, ConsecutivePartition) {
  const std::vector<int> sizes = {2, 3, 1};
  const auto p = consecutive_partition(sizes);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(p[1], (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(p[2], (std::vector<int>{5}));
  const std::vector<int> bad = {2, 0};
  EXPECT_THROW(consecutive_partition(bad), DomainError);
}

TEST(CopulaHac, SamplingReproducible) {
  const HacModel model = make_hac(gamma_eg(0.5, 200, 8), {{0, 1}, {2}});
  kernels::set_thread_limit(1);
  const Matrix a = model.sample(1000, 4);
  kernels::set_thread_limit(2);
  const Matrix b = model.sample(1000, 4);
  kernels::set_thread_limit(0);
  EXPECT_EQ(a, b);
}
