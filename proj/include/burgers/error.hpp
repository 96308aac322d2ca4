#pragma once

#include <stdexcept>
#include <string>

namespace burgers {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied data was violated (bad shape, non-finite
/// values, mismatched grids, out-of-range parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A computation failed after valid inputs were accepted: divergence,
/// blow-up, non-finite Monte Carlo output.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems; `path()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace burgers
