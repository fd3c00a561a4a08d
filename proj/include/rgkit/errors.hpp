#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgkit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string const& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A computation ran out of its budget (cosets, levels, effort). This is never a
// mathematical statement; `partial()` carries how far the computation got.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(std::string const& what, std::size_t partial)
      : Error(what), partial_(partial) {}

  std::size_t partial() const noexcept { return partial_; }

 private:
  std::size_t partial_;
};

// A post-condition check failed. Indicates a bug, never bad input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace rgkit
