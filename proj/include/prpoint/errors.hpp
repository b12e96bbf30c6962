#pragma once

#include <stdexcept>
#include <string>

namespace prpoint {

// Error taxonomy shared by every module. Callers that need to branch on the
// failure kind (the CLI maps them to exit codes) catch the specific type.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition on an argument violated (bad residue, bad bounds, ...).
struct InvalidInput : Error {
  using Error::Error;
};

/// Not enough p-adic digits to deliver the requested answer.
struct PrecisionError : Error {
  PrecisionError(const std::string& what, int required = -1)
      : Error(what), required_precision(required) {}
  int required_precision;
};

/// Measure/jet depth too small for the requested precision.
struct DepthError : Error {
  DepthError(const std::string& what, int required)
      : Error(what), required_depth(required) {}
  int required_depth;
};

/// Series outside its domain of convergence.
struct DivergenceError : Error {
  using Error::Error;
};

struct BadReductionError : Error {
  using Error::Error;
};

struct NotOrdinaryError : Error {
  using Error::Error;
};

/// Root number of the wrong sign for the requested derivative.
struct WrongRankError : Error {
  using Error::Error;
};

struct SlopeError : Error {
  using Error::Error;
};

struct IsolationFailure : Error {
  using Error::Error;
};

struct CalibrationFailure : Error {
  using Error::Error;
};

struct AmbiguousRational : Error {
  using Error::Error;
};

struct LiftFailure : Error {
  using Error::Error;
};

/// Internal invariant violated. Never expected on valid input.
struct ConsistencyError : Error {
  using Error::Error;
};

}  // namespace prpoint
