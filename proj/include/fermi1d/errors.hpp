#pragma once

#include <stdexcept>
#include <string>

namespace fermi1d {

/// Input that violates a documented precondition (bad grid size, negative
/// density, delta outside [0,1], ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to deliver a result meeting its contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fermi1d
