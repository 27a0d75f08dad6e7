#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lenc {

// Malformed alignment input. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few samples or zero spread for a gamma fit.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mode requested for a gamma with shape < 1 (density unbounded at 0).
class NoInteriorModeError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace lenc
