#ifndef COPULA_FORGE_DETAIL_PARALLEL_HPP
#define COPULA_FORGE_DETAIL_PARALLEL_HPP

#include <cstddef>
#include <exception>

namespace copula_forge::detail {

// body(i) for i in [0, n) across OpenMP threads; the first exception thrown
// by any iteration is rethrown once the loop has finished.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(copula_forge_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace copula_forge::detail

#endif  // COPULA_FORGE_DETAIL_PARALLEL_HPP
