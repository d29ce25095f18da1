#pragma once

#include <stdexcept>
#include <string>

namespace dubrovin {

/// Malformed or inconsistent user input (configs, JSON files, flag values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that cannot proceed: step-size underflow, singular
/// harmonic basis, blow-up of the spectral oracle.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dubrovin
