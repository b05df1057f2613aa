#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softgate {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (wrong column count, non-numeric cell, bad header).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function (e.g. logit(0)).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Persisted artifact that cannot be read back: truncated, corrupted or of an
// unsupported schema version.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace softgate
