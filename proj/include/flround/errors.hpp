#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flround {

// Malformed or out-of-range input (bad parameters, non-metric data, parse errors).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Instance text that does not parse; `offset` is the byte position.
class ParseError : public InvalidInput {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : InvalidInput("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// A configured size or enumeration cap would be exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The simplex lost numerical control (cycling guard, singular basis,
// residuals outside tolerance). Never swallowed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A runtime guarantee that the algorithms prove could not be established.
class GuaranteeViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace flround
