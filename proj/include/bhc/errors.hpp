#pragma once
// Exception types shared across the library.

#include <stdexcept>
#include <string>

namespace bhc {

// Malformed or out-of-range user input (flags, config files, spec strings).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An evaluation would leave the double-precision range of exp(alpha0 t^2).
class OverflowGuardError : public std::range_error {
 public:
  OverflowGuardError(const std::string& what, double amplitude, double limit)
      : std::range_error(what), amplitude_(amplitude), limit_(limit) {}
  double amplitude() const { return amplitude_; }
  double limit() const { return limit_; }

 private:
  double amplitude_;
  double limit_;
};

// Search or iteration failed to produce a result (no bracket, no descent).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bhc
