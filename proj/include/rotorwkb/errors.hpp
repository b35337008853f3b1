#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotorwkb {

/// Raised when a non-finite value appears mid-run.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// A step size that violates a stability bound of the selected solver.
class CflViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rotorwkb
