#pragma once

#include <stdexcept>
#include <string>

namespace acg {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad shape, bad bound, empty
// interval, ...). These are programming/configuration mistakes, not runtime
// numerical failures.
struct InvalidInputError : Error {
  using Error::Error;
};

// A numerical operation failed or produced non-finite values.
struct NumericError : Error {
  using Error::Error;
};

// A matrix that must be positive definite is not (within the allowed jitter
// budget). Subtype of NumericError: callers that only care about "the math
// broke" can catch the base.
struct DefinitenessError : NumericError {
  using NumericError::NumericError;
};

// Internal chain state got out of sync (e.g. theta no longer matches
// soft_threshold(beta, kappa)). Indicates a bug, not bad user input.
struct StateError : Error {
  using Error::Error;
};

// Bad run configuration detected before any work started.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace acg
