#pragma once

#include <stdexcept>
#include <string>

namespace critical_arm {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InconsistentLawError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NoCrossingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingRowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveMeanError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace critical_arm
