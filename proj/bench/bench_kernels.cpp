// Serial reference against OpenMP kernels on the same inputs.

#include <benchmark/benchmark.h>

#include <vector>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/kernels.hpp"
#include "copula_forge/laplace.hpp"
#include "copula_forge/parametric.hpp"

using namespace copula_forge;
namespace k = copula_forge::kernels;

namespace {

AcModel empirical_model(int dim) {
  Rng rng = stream_rng(1, 0);
  std::vector<double> m(1000);
  for (auto& v : m) v = sample_gamma(0.2, rng);
  return AcModel(EmpiricalGenerator(m), dim);
}

Matrix clayton_rows(int dim, std::size_t n) { return AcModel(ParametricGenerator(Family::Clayton, 5.0), dim).sample(n, 2); }

// Any row kernel over a model: log-density or cdf.
template <auto Kernel>
void model_rows(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const AcModel model = empirical_model(dim);
  const Matrix u = clayton_rows(dim, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(model, u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(u.rows()));
}

template <auto Kernel>
void empirical_copula(benchmark::State& state) {
  const Matrix data = clayton_rows(4, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(data, data));
}

template <auto Kernel>
void kendall(benchmark::State& state) {
  const Matrix data = clayton_rows(2, static_cast<std::size_t>(state.range(0)));
  const auto x = data.column(0), y = data.column(1);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, y));
}

constexpr std::vector<double> (*serial_ld)(const AcModel&, const Matrix&) = k::serial::log_density_rows;
constexpr std::vector<double> (*parallel_ld)(const AcModel&, const Matrix&) = k::parallel::log_density_rows;
constexpr std::vector<double> (*serial_cdf)(const AcModel&, const Matrix&) = k::serial::cdf_rows;
constexpr std::vector<double> (*parallel_cdf)(const AcModel&, const Matrix&) = k::parallel::cdf_rows;

}  // namespace

BENCHMARK(model_rows<serial_ld>)->Name("log_density/serial")->Arg(2)->Arg(10)->Arg(20);
BENCHMARK(model_rows<parallel_ld>)->Name("log_density/parallel")->Arg(2)->Arg(10)->Arg(20);
BENCHMARK(model_rows<serial_cdf>)->Name("cdf/serial")->Arg(2)->Arg(10);
BENCHMARK(model_rows<parallel_cdf>)->Name("cdf/parallel")->Arg(2)->Arg(10);
BENCHMARK(empirical_copula<k::serial::empirical_copula_rows>)->Name("empirical_copula/serial")->Arg(1000)->Arg(3000);
BENCHMARK(empirical_copula<k::parallel::empirical_copula_rows>)->Name("empirical_copula/parallel")->Arg(1000)->Arg(3000);
BENCHMARK(kendall<k::serial::kendall_tau>)->Name("kendall_tau/serial")->Arg(1000)->Arg(4000);
BENCHMARK(kendall<k::parallel::kendall_tau>)->Name("kendall_tau/parallel")->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
