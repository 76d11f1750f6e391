#pragma once

#include <stdexcept>
#include <string>

namespace ctt {

/// Shape or extent mismatch between operands.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented precondition of an operation was violated.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A softmax row lost all of its keys to masking.
class DegenerateRowError : public std::runtime_error {
 public:
  explicit DegenerateRowError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ctt
