#pragma once

#include <stdexcept>

namespace covercc {

// Input rejected before any computation starts: bad parameters, bad shapes,
// labels out of range, results leaving the unit cube. Maps to CLI exit 1.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input; the message carries the 1-based line number.
class parse_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// Malformed binary input: bad magic, truncated payload, count mismatch.
class format_error : public validation_error {
 public:
  using validation_error::validation_error;
};

// A computation failed numerically, e.g. the kernel matrix stays
// indefinite after the whole jitter ladder. Maps to CLI exit 2.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested quantity does not exist for these inputs: cd = 0 leaves the
// cover complexity undefined, e^{-L} <= c leaves no positive margin.
// Maps to CLI exit 2.
class undefined_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An experiment aborted on a cross-check, e.g. a measured accuracy fell
// below a bound whose preconditions held. Maps to CLI exit 2.
class run_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covercc
