#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slfrac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field or indicator set was used with a mesh it was not built on.
class MeshMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to a library operation (bad index, bad parameter).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The linear system has a nontrivial kernel and cannot be solved.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// An iterative method stopped before reaching its tolerance.  Carries the
/// residual/increment history so callers can decide how to react.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slfrac
