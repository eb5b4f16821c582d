#ifndef COPULA_FORGE_KERNELS_HPP
#define COPULA_FORGE_KERNELS_HPP

#include <span>
#include <vector>

#include "copula_forge/copula_ac.hpp"
#include "copula_forge/copula_hac.hpp"
#include "copula_forge/matrix.hpp"

// Row-batched evaluation. Every kernel has a serial reference and an OpenMP
// version; both evaluate each row with the same code and reduce in row
// order, so their outputs are bit-identical for any thread count.
namespace copula_forge::kernels {

namespace serial {
std::vector<double> log_density_rows(const AcModel& model, const Matrix& u);
std::vector<double> cdf_rows(const AcModel& model, const Matrix& u);
std::vector<double> cdf_rows(const HacModel& model, const Matrix& u);
/// C_N evaluated at every row of `points` (the fraction of data rows
/// componentwise <= the point).
std::vector<double> empirical_copula_rows(const Matrix& data, const Matrix& points);
double kendall_tau(std::span<const double> x, std::span<const double> y);
Matrix kendall_tau_matrix(const Matrix& data);
}  // namespace serial

namespace parallel {
std::vector<double> log_density_rows(const AcModel& model, const Matrix& u);
std::vector<double> cdf_rows(const AcModel& model, const Matrix& u);
std::vector<double> cdf_rows(const HacModel& model, const Matrix& u);
std::vector<double> empirical_copula_rows(const Matrix& data, const Matrix& points);
double kendall_tau(std::span<const double> x, std::span<const double> y);
Matrix kendall_tau_matrix(const Matrix& data);
}  // namespace parallel

/// Caps the OpenMP worker count; <= 0 restores the runtime default.
void set_thread_limit(int threads);
int thread_limit();

}  // namespace copula_forge::kernels

#endif  // COPULA_FORGE_KERNELS_HPP
