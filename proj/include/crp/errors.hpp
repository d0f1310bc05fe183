#pragma once

#include <stdexcept>
#include <string>

namespace crp {

// Bad argument to a public operation (wrong size, out-of-range value,
// malformed input).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematical precondition on the scenario does not hold (e.g. f''(0) = 0
// where a bound needs it strictly positive).
class PreconditionViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numeric degeneracy: the algorithm ran but produced an unusable answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneratePartition : public NumericError {
 public:
  using NumericError::NumericError;
};

class RootNotFound : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace crp
