#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regseg {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Data violates a structural invariant (non-monotone index, out-of-range member, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A tuning parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but carries no information (zero variance and the like).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatch or requested size exceeds what the data holds.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A condition the implementation guarantees was violated.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace regseg
