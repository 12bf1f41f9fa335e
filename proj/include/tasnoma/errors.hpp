#pragma once

#include <stdexcept>

namespace tasnoma {

// A parameter or configuration value is outside its admissible set.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An argument lies outside the domain of an otherwise valid function.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A series computation lost too many significant digits to be trusted.
// Callers are expected to fall back to simulation.
class precision_loss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tasnoma
