#pragma once

#include <stdexcept>
#include <string>

namespace symreg {

// Caller violated an operation's precondition (pushing onto a complete
// traversal, empty batch, unknown suite, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A token sequence or tree does not describe a well-formed expression.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or out-of-contract input data (CSV, registry, checkpoint).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace symreg
