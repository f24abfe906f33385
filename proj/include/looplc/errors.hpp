#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace looplc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The set geometry cannot support the requested operation, e.g. the
/// center of a shifted set is not strictly interior.
class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, std::ptrdiff_t row = -1)
      : Error(what), row_(row) {}
  /// Offending constraint row, or -1 when not row specific.
  std::ptrdiff_t row() const noexcept { return row_; }

 private:
  std::ptrdiff_t row_;
};

/// Total demand cannot be met within the generation limits.
class InfeasibleDemand : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to converge or produced non-finite values.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace looplc
