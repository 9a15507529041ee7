#pragma once

#include <stdexcept>
#include <string>

namespace orthodiag {

/// Thrown when a caller breaks a documented precondition (bad index, shape
/// mismatch, out-of-range parameter).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown by the text readers on malformed input.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace orthodiag
