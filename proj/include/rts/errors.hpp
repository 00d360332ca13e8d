#pragma once

#include <stdexcept>
#include <string>

namespace rts {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input (violated precondition, malformed config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical failures; the CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonTrapping : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Unbounded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AliasError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegreeOverflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConsistencyFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditioned : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rts
