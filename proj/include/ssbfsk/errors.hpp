#pragma once

#include <stdexcept>
#include <string>

namespace ssbfsk {

// Argument outside the mathematical domain of a formula (non-positive width, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A configuration that cannot be built: bad sampling rate, unsupported modulation index, ...
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller-supplied data that violates an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssbfsk
