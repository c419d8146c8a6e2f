#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formation {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments (non-finite coordinates, size mismatches, bad ids).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A value type invariant does not hold (asymmetric neighbor sets, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// An operation was called while its modelling assumption is violated.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}

  /// Offending component, or -1 when not applicable.
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// Scenario file could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The simulation had to stop (e.g. the control graph lost its spanning tree).
class RuntimeAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace formation
