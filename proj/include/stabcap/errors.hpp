#ifndef STABCAP_ERRORS_HPP
#define STABCAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stabcap {

// Bad arguments or malformed inputs. CLI maps this to exit code 2.
struct InputError : std::invalid_argument {
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A request the implementation cannot serve (unsupported family, budget
// exceeded). CLI maps this to exit code 3.
struct CapabilityError : std::runtime_error {
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: overflow to non-finite values, solver breakdown.
// CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stabcap

#endif
