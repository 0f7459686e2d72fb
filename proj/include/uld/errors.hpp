#pragma once

#include <stdexcept>
#include <string>

namespace uld {

// Precondition / argument violations (dimension mismatch, bad parameters).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failures: iteration caps, factorization failures, instability.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A chain produced a non-finite state; carries the offending step index.
class PoisonedStateError : public std::runtime_error {
 public:
  PoisonedStateError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  long step_index;
};

}  // namespace uld
