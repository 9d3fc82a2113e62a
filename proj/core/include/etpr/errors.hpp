#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etpr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class OptimizationFailed : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class StudyFailed : public Error {
 public:
  using Error::Error;
};

class UnknownCurveId : public Error {
 public:
  using Error::Error;
};

class InconsistentDimensions : public Error {
 public:
  using Error::Error;
};

/// Malformed tabular input. `line()` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace etpr
