#pragma once

#include <stdexcept>

namespace dualpath {

// Invalid model or engine parameter (negative intensity, degenerate rectangle, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well formed but the quantity is undefined there (r = 0 path loss,
// divergent all-LoS interference, interference-free network).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent experiment configuration (bad JSON, unknown key,
// wrong type). Maps to exit status 2 in the command line tool.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dualpath
