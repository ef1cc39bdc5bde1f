#pragma once

#include <stdexcept>
#include <string>

namespace ionfilter {

/// Broad failure categories; the command-line tool maps each to an exit code.
enum class ErrorKind {
  InvalidArgument,  ///< precondition or invariant violated by the caller
  Config,           ///< malformed or inconsistent run configuration
  Numerical,        ///< non-convergence, step underflow, positivity loss
  Undesignable,     ///< the requested filter cannot be realized
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

class UndesignableError : public Error {
 public:
  explicit UndesignableError(const std::string& what)
      : Error(ErrorKind::Undesignable, what) {}
};

}  // namespace ionfilter
