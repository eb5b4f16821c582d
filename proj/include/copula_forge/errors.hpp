#ifndef COPULA_FORGE_ERRORS_HPP
#define COPULA_FORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace copula_forge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Density requested at a point on the boundary of the unit cube.
class BoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A family, derivative order, latent sampler or dataset spec that is not
/// implemented.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API precondition (shape or length mismatch).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Root finder failed to reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace copula_forge

#endif  // COPULA_FORGE_ERRORS_HPP
