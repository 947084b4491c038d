#pragma once

#include <stdexcept>
#include <string>

namespace qdx {

// Malformed or out-of-domain input (bad degree, coincident poles, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iteration failed to converge or a tolerance could not be met.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A mathematical invariant that must hold was violated; always a bug signal.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdx
