#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace minsurf {

/// Precondition failures: non-finite entries, shape mismatches, k >= 1, infeasible sampler bounds.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Metric field violates g >= id beyond tolerance.
class InvalidMetric : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Degenerate or inverted triangle, inconsistent mesh arrays.
class InvalidMesh : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Degenerate input for an otherwise well-defined operation (e.g. vanishing column).
class DegenerateInput : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class OutOfDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotInjective : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, parsed or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver did not reach its tolerance. Carries the residual history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, std::vector<double> history = {})
      : std::runtime_error(what), last_residual_(last_residual), history_(std::move(history)) {}

  double last_residual() const { return last_residual_; }
  const std::vector<double>& history() const { return history_; }

 private:
  double last_residual_;
  std::vector<double> history_;
};

}  // namespace minsurf
