#pragma once

#include <stdexcept>
#include <string>

namespace avrc {

// Bad configuration or arguments supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be parsed or fails validation (score files, rows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A runtime invariant of the calibration loop was broken. Indicates a bug or
// a misconfigured component rather than bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace avrc
