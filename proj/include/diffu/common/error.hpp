#pragma once

#include <stdexcept>
#include <string>

namespace diffu {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: dimension mismatch, precondition violated, malformed file.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An oracle was asked for something it cannot provide (no sampler, no HVP).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Second derivatives of a piecewise-linear map are Dirac measures at a kink.
class DistributionalCurvature : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (NaN loss, divergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void fail_validation(const std::string& what) { throw ValidationError(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace diffu
