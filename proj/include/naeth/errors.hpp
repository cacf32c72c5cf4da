#pragma once

#include <stdexcept>
#include <string>

namespace naeth {

/// Malformed input: bad quantum numbers, mismatched dimensions, bad config.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request exceeds the configured memory/size budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: eigensolver breakdown, root finder non-convergence,
/// failed symmetry precondition.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Target (E, M) lies outside the region reachable by the ensemble.
class InfeasibleTarget : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace naeth
