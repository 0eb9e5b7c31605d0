#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfgz {

/// Precondition violated by the caller (bad sizes, mismatched dimensions, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Expression or configuration text could not be parsed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Runtime failure while evaluating an expression (division by zero, non-finite result).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem size exceeds a hard cap (exact transport, brute-force enumeration).
class SizeLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CflViolation : public std::runtime_error {
 public:
  CflViolation(const std::string& what, double number)
      : std::runtime_error(what), number_(number) {}
  double cfl_number() const noexcept { return number_; }

 private:
  double number_;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A propagated configuration left the interpolation grid.
class GridExcursion : public std::runtime_error {
 public:
  GridExcursion(const std::string& what, double magnitude)
      : std::runtime_error(what), magnitude_(magnitude) {}
  double magnitude() const noexcept { return magnitude_; }

 private:
  double magnitude_;
};

}  // namespace mfgz
