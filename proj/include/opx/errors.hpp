#pragma once
#include <stdexcept>
#include <string>

namespace opx {

// Bad input: unknown ids, parameters outside a precondition, points outside
// a domain, missing branch side. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CatalogError : ValidationError {
  using ValidationError::ValidationError;
};
struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};
struct BranchError : ValidationError {
  using ValidationError::ValidationError;
};
struct RegimeError : ValidationError {
  using ValidationError::ValidationError;
};

// Numerical failure: a solver or quadrature did not reach its target.
// The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : NumericalError {
  using NumericalError::NumericalError;
};
struct ResolutionError : NumericalError {
  using NumericalError::NumericalError;
};
struct PrecisionError : NumericalError {
  using NumericalError::NumericalError;
};
struct GrowthError : NumericalError {
  using NumericalError::NumericalError;
};
struct ConditionError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace opx
