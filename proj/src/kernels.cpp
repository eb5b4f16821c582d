#include "copula_forge/kernels.hpp"

#include <omp.h>

#include <cstdint>
#include <utility>

#include "copula_forge/detail/parallel.hpp"

#include "copula_forge/errors.hpp"

namespace copula_forge::kernels {
namespace {

template <class Body>
void omp_for(std::size_t n, Body&& body) {
  detail::parallel_for(n, std::forward<Body>(body));
}

template <class Body>
void serial_for(std::size_t n, Body&& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

double empirical_copula_at(const Matrix& data, std::span<const double> p) {
  std::size_t hits = 0;
  for (std::size_t k = 0; k < data.rows(); ++k) {
    auto row = data.row(k);
    bool below = true;
    for (std::size_t c = 0; c < row.size() && below; ++c) below = row[c] <= p[c];
    hits += below;
  }
  return static_cast<double>(hits) / static_cast<double>(data.rows());
}

// Concordant minus discordant pairs involving row i and later rows.
std::int64_t concordance_from(std::span<const double> x, std::span<const double> y, std::size_t i) {
  std::int64_t s = 0;
  for (std::size_t k = i + 1; k < x.size(); ++k) {
    const double dx = x[i] - x[k];
    const double dy = y[i] - y[k];
    const double p = dx * dy;
    s += (p > 0.0) - (p < 0.0);
  }
  return s;
}

double tau_from_sum(std::int64_t s, std::size_t n) {
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(s) / pairs;
}

void check_kendall(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("kendall_tau: samples differ in length");
  if (x.size() < 2) throw DomainError("kendall_tau: need at least two observations");
}

template <class For>
std::vector<double> log_density_impl(const AcModel& model, const Matrix& u, For&& loop) {
  std::vector<double> out(u.rows());
  loop(u.rows(), [&](std::size_t r) { out[r] = model.log_density(u.row(r)); });
  return out;
}

template <class Model, class For>
std::vector<double> cdf_impl(const Model& model, const Matrix& u, For&& loop) {
  std::vector<double> out(u.rows());
  loop(u.rows(), [&](std::size_t r) { out[r] = model.cdf(u.row(r)); });
  return out;
}

template <class For>
std::vector<double> ecop_impl(const Matrix& data, const Matrix& points, For&& loop) {
  if (data.cols() != points.cols()) throw ContractError("empirical copula: dimension mismatch");
  if (data.empty()) throw DomainError("empirical copula: no data");
  std::vector<double> out(points.rows());
  loop(points.rows(), [&](std::size_t r) { out[r] = empirical_copula_at(data, points.row(r)); });
  return out;
}

template <class TauFn>
Matrix tau_matrix_impl(const Matrix& data, TauFn&& tau) {
  const std::size_t d = data.cols();
  Matrix out(d, d, 1.0);
  std::vector<std::vector<double>> cols(d);
  for (std::size_t c = 0; c < d; ++c) cols[c] = data.column(c);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) out(a, b) = out(b, a) = tau(cols[a], cols[b]);
  return out;
}

}  // namespace

namespace serial {

std::vector<double> log_density_rows(const AcModel& model, const Matrix& u) {
  return log_density_impl(model, u, [](std::size_t n, auto&& f) { serial_for(n, f); });
}
std::vector<double> cdf_rows(const AcModel& model, const Matrix& u) {
  return cdf_impl(model, u, [](std::size_t n, auto&& f) { serial_for(n, f); });
}
std::vector<double> cdf_rows(const HacModel& model, const Matrix& u) {
  return cdf_impl(model, u, [](std::size_t n, auto&& f) { serial_for(n, f); });
}
std::vector<double> empirical_copula_rows(const Matrix& data, const Matrix& points) {
  return ecop_impl(data, points, [](std::size_t n, auto&& f) { serial_for(n, f); });
}
double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_kendall(x, y);
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += concordance_from(x, y, i);
  return tau_from_sum(s, x.size());
}
Matrix kendall_tau_matrix(const Matrix& data) {
  return tau_matrix_impl(data, [](const auto& a, const auto& b) { return serial::kendall_tau(a, b); });
}

}  // namespace serial

namespace parallel {

std::vector<double> log_density_rows(const AcModel& model, const Matrix& u) {
  return log_density_impl(model, u, [](std::size_t n, auto&& f) { omp_for(n, f); });
}
std::vector<double> cdf_rows(const AcModel& model, const Matrix& u) {
  return cdf_impl(model, u, [](std::size_t n, auto&& f) { omp_for(n, f); });
}
std::vector<double> cdf_rows(const HacModel& model, const Matrix& u) {
  return cdf_impl(model, u, [](std::size_t n, auto&& f) { omp_for(n, f); });
}
std::vector<double> empirical_copula_rows(const Matrix& data, const Matrix& points) {
  return ecop_impl(data, points, [](std::size_t n, auto&& f) { omp_for(n, f); });
}
double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_kendall(x, y);
  std::int64_t s = 0;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : s)
  for (std::ptrdiff_t i = 0; i < n; ++i) s += concordance_from(x, y, static_cast<std::size_t>(i));
  return tau_from_sum(s, x.size());
}
Matrix kendall_tau_matrix(const Matrix& data) {
  return tau_matrix_impl(data, [](const auto& a, const auto& b) { return parallel::kendall_tau(a, b); });
}

}  // namespace parallel

void set_thread_limit(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  else omp_set_num_threads(omp_get_num_procs());
}

int thread_limit() { return omp_get_max_threads(); }

}  // namespace copula_forge::kernels
