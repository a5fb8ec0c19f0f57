#pragma once

#include <stdexcept>
#include <string>

namespace snnloop {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad dimensions, bad config values, violated invariants on inputs.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed file contents; message carries file/field context.
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Non-finite values reached the numeric core (membranes, losses, actions).
struct NumericFault : Error {
  using Error::Error;
};

// Training loss became non-finite; message names the epoch.
struct TrainingDiverged : NumericFault {
  using NumericFault::NumericFault;
};

// Iterative solver hit its iteration cap without reaching tolerance.
struct SolverError : Error {
  using Error::Error;
};

// API called out of order (e.g. capturing residuals twice per inference).
struct ProtocolError : Error {
  using Error::Error;
};

// Input set carries no usable signal (zero covariance, no valid pairs).
struct DegenerateData : Error {
  using Error::Error;
};

}  // namespace snnloop
