#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace critpt {

/// Precondition violated by an argument value (non-positive input, bad basin, h <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iteration cap exhausted before the tolerance was met. Carries the best iterate found.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double best_value, double best_residual,
                      std::size_t steps)
      : std::runtime_error(what),
        best_value_(best_value),
        best_residual_(best_residual),
        steps_(steps) {}

  double best_value() const { return best_value_; }
  double best_residual() const { return best_residual_; }
  std::size_t steps() const { return steps_; }

 private:
  double best_value_;
  double best_residual_;
  std::size_t steps_;
};

/// A problem evaluator produced a non-finite value. Carries the offending point.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, Eigen::VectorXd theta)
      : std::runtime_error(what), theta_(std::move(theta)) {}

  const Eigen::VectorXd& theta() const { return theta_; }

 private:
  Eigen::VectorXd theta_;
};

/// Dense assembly requested above the size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// NaN/Inf encountered inside an iterative solver.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Line search handed a direction along which the squared gradient norm does not decrease.
class NonDescentDirection : public std::runtime_error {
 public:
  NonDescentDirection(const std::string& what, double slope)
      : std::runtime_error(what), slope_(slope) {}
  double slope() const { return slope_; }

 private:
  double slope_;
};

/// Invalid run configuration: bad syntax, unknown name, or violated constraint.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace critpt
