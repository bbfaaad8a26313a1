#pragma once

#include <stdexcept>
#include <string>

namespace scou {

// Bad inputs: invalid parameters, malformed series, out-of-range options.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical computation produced no usable result (e.g. all mass underflowed).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scou
