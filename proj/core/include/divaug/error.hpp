#pragma once

#include <stdexcept>
#include <string>

namespace divaug {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad shape, out-of-range
/// magnitude, S > E, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// log(0) and friends.
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace divaug
