#pragma once

#include <stdexcept>
#include <string>

namespace ratekit {

/// Numerical failure: non-convergence, instability, singular solves.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, inconsistent dimensions, missing files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ratekit
