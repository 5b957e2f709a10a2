#pragma once

#include <stdexcept>
#include <string>

namespace qcs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter bundle fails its invariants.
struct ConfigError : Error {
  using Error::Error;
};

// Argument outside the domain of a formula.
struct DomainError : Error {
  using Error::Error;
};

// Iterative routine failed to converge.
struct NumericalError : Error {
  using Error::Error;
};

// Query on an empty or otherwise unusable container.
struct QueryError : Error {
  using Error::Error;
};

// Operation not valid in the current state (e.g. empty arm).
struct StateError : Error {
  using Error::Error;
};

// tune_r produced a nonpositive r.
struct TuningError : Error {
  using Error::Error;
};

// Paired samples with unequal counts.
struct PairingError : Error {
  using Error::Error;
};

// Requested feature needs information that is not available.
struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace qcs
