#pragma once

#include <stdexcept>
#include <string>

namespace mcr2 {

// Bad arguments: shapes, ranges, non-finite entries, malformed memberships.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

class DimensionMismatch : public InvalidInput {
 public:
  explicit DimensionMismatch(const std::string& what) : InvalidInput(what) {}
};

// Factorization failure, NaN in an iterate, and similar.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// No ascent step could be found on the very first optimizer iteration.
class StagnationError : public std::runtime_error {
 public:
  explicit StagnationError(const std::string& what) : std::runtime_error(what) {}
};

// A feature column collapsed to (numerically) zero before sphere projection.
class DegenerateFeature : public std::runtime_error {
 public:
  explicit DegenerateFeature(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mcr2
