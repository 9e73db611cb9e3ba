#pragma once

#include <stdexcept>
#include <string>

namespace apd {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No local orientations survived sampling, so no pith can be located.
class DetectionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The PClines stage selected no convergent segment.
class FilteringFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apd
