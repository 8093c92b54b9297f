#pragma once

#include <stdexcept>
#include <string>

namespace detcurve {

/// Raised when operands disagree on ambient dimension or matrix shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by exact tuple enumeration when the tuple count exceeds the budget.
/// Callers are expected to fall back to the sampled estimator.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario configuration or generator specification.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace detcurve
