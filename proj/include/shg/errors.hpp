#pragma once

#include <stdexcept>
#include <string>

namespace shg {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent user input: bad grid, malformed config, shape
// mismatch between fields, out-of-range parameter.
struct ConfigError : Error {
  using Error::Error;
};

// Physical admissibility violated: bounds on coefficients, nonpositive
// absorption, Im q <= 0 without an explicit override.
struct AdmissibilityError : Error {
  using Error::Error;
};

// Linear algebra breakdown or a residual above tolerance.
struct SolverError : Error {
  using Error::Error;
};

// Fixed-point iteration failed to contract.
struct DivergedError : SolverError {
  using SolverError::SolverError;
};

// A data-side precondition failed (inflow set empty, E1 not positive, ...).
struct DataConditionError : Error {
  using Error::Error;
};

}  // namespace shg
