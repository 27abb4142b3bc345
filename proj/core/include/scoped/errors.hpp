#pragma once

#include <stdexcept>
#include <string>

namespace scoped {

// Malformed or out-of-range user input (bad file, bad parameter, unknown kind).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Artifacts that do not belong together (fingerprint mismatch, dimension mismatch
// between a model and a dataset).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scoped
