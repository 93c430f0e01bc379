#pragma once

#include <stdexcept>
#include <string>

namespace penning {

// Bad user input: malformed configuration or parameters violating a record's invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The physics has no answer at these parameters: resonance, unstable crystal,
// undefined squeezing, minimizer non-convergence.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical invariant that must hold was violated. Signals a bug or a regime
// the algorithms were not built for; never raised for user input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace penning
