#pragma once

#include <stdexcept>
#include <string>

namespace vlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (grid sizes, config keys, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A boundary integration would produce a multivalued function
/// (nonzero circulation, net force or torque).
class MultivaluedError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a compatibility condition of the operation
/// (flux, Saint-Venant, d-bar compatibility, curl-free, jet mismatch).
class IncompatibleDataError : public Error {
 public:
  using Error::Error;
};

/// A discrete system could not be solved, or an iteration diverged.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Operation not supported for the given arguments.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace vlab
