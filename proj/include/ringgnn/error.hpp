#pragma once

#include <stdexcept>
#include <string>

namespace ringgnn {

// Base class for every error raised by the library. Each subclass maps to
// one failure category so callers (and the CLI) can react by type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or sizes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Generator or operator arguments outside their valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Requested problem size exceeds what an exhaustive routine supports.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A randomized procedure ran out of its restart budget.
class RetryExhaustedError : public Error {
 public:
  using Error::Error;
};

// Input lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iterative numerical method did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward() on a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A verification routine found a mismatch against its reference.
class VerificationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringgnn
