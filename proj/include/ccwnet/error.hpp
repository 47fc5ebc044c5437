#pragma once

#include <stdexcept>
#include <string>

namespace ccwnet {

/// Raised when the input data or an estimate violates a modelling
/// requirement (non-identifying summary, divergence, stratum underflow, ...).
/// The CLI maps this to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, file or invocation. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccwnet
