#pragma once

#include <stdexcept>
#include <string>

namespace binrec {

// Error categories map one-to-one onto the CLI exit-code contract.
enum class ErrorKind {
  config = 1,
  data = 2,
  internal = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid user-supplied configuration or arguments.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Malformed, missing or degenerate input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// A metric that is undefined on its input (e.g. AUC over a single class).
class UndefinedMetricError : public DataError {
 public:
  using DataError::DataError;
};

/// An internal invariant did not hold.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace binrec
