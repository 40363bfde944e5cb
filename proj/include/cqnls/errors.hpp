#pragma once

#include <stdexcept>
#include <string>

namespace cqnls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A scaled kernel is narrower than the grid can represent, or not contained in the box.
class UnderResolved : public Error {
 public:
  using Error::Error;
};

/// Work estimate for an evaluation exceeds the configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis required by the requested computation does not hold.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

class SolverDiverged : public Error {
 public:
  using Error::Error;
};

class IterationCapReached : public Error {
 public:
  using Error::Error;
};

/// Shooting could not bracket or resolve the ground-state profile.
class ShootingFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqnls
