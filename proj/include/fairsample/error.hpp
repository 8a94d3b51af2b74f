#pragma once

#include <stdexcept>
#include <string>

namespace fairsample {

// A caller broke a documented precondition (bad spec, bad CSV cell, bad size).
// The CLI maps this to exit code 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be read or written. The CLI maps this to exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace fairsample
