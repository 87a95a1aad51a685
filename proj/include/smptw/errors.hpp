#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smptw {

/// Invalid argument: out-of-domain parameter, observation, or configuration.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input is valid but too close to a degenerate region for the requested
/// quantity (e.g. conditioning on an event of probability ~0).
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical procedure failed: overflow, quadrature or root-finder failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative procedure hit its iteration cap. Carries the last partial result.
class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(const std::string& what, double partial, std::size_t steps)
      : NumericError(what), partial_(partial), steps_(steps) {}

  double partial_result() const noexcept { return partial_; }
  std::size_t steps() const noexcept { return steps_; }

 private:
  double partial_;
  std::size_t steps_;
};

/// Two independent evaluation routes disagree beyond tolerance.
class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace smptw
