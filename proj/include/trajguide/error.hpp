#pragma once

#include <stdexcept>
#include <string>

namespace trajguide {

/// Raised when a planner query has no path between its endpoints.
class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a rejection sampler exhausts its attempt budget.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed serialized input (world files, trajectory JSON, configs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajguide
