#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coordnet {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that breaks a domain rule (negative timestamp,
/// undeclared action type, duplicate label, invalid configuration ...).
class ValidationError : public Error {
 public:
  ValidationError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  explicit ValidationError(const std::string& what) : ValidationError(0, what) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A caller broke a documented precondition of a pure computation.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A metric or selection is undefined on the given inputs
/// (e.g. F1* with no positives, a beta sweep with no co-actions).
class UndefinedResult : public Error {
 public:
  using Error::Error;
};

}  // namespace coordnet
