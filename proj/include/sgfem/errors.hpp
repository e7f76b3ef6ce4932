#pragma once

#include <stdexcept>
#include <string>

namespace sgfem {

/// Raised when a numerical kernel (eigen-solve, factorization, iterative
/// solve) does not deliver a result within its stated accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sgfem
