#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace critpt {

/// A point in parameter space.
using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Copies coordinates into a ParamVector, rejecting NaN/Inf.
ParamVector make_param(std::span<const double> coordinates);
ParamVector make_param(std::initializer_list<double> coordinates);

bool all_finite(const ParamVector& v);

/// Snapshot of evaluation counts.
struct EvalCounts {
  std::uint64_t value = 0;
  std::uint64_t gradient = 0;
  std::uint64_t hvp = 0;

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

/// Evaluation counters shared by everything that touches one run. Increments are atomic,
/// so totals stay exact when several threads share a counter.
class EvalCounter {
 public:
  EvalCounter() = default;
  EvalCounter(const EvalCounter&) = delete;
  EvalCounter& operator=(const EvalCounter&) = delete;

  void add_value() { value_.fetch_add(1, std::memory_order_relaxed); }
  void add_gradient() { gradient_.fetch_add(1, std::memory_order_relaxed); }
  void add_hvp() { hvp_.fetch_add(1, std::memory_order_relaxed); }

  EvalCounts snapshot() const {
    return {value_.load(std::memory_order_relaxed), gradient_.load(std::memory_order_relaxed),
            hvp_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> value_{0};
  std::atomic<std::uint64_t> gradient_{0};
  std::atomic<std::uint64_t> hvp_{0};
};

struct KnownCriticalPoint {
  ParamVector theta;
  int morse_index = 0;
  double loss = 0.0;
};

/// A differentiable loss with analytic gradient and, optionally, an analytic
/// Hessian-vector product. Immutable once built; evaluators must be pure.
class Problem {
 public:
  using ValueFn = std::function<double(const ParamVector&)>;
  using GradientFn = std::function<ParamVector(const ParamVector&)>;
  using HvpFn = std::function<ParamVector(const ParamVector&, const ParamVector&)>;

  Problem(std::string name, Eigen::Index dimension, ValueFn value, GradientFn gradient,
          HvpFn hvp = {}, std::vector<KnownCriticalPoint> known_critical_points = {});

  const std::string& name() const { return name_; }
  Eigen::Index dimension() const { return dimension_; }
  bool has_hvp() const { return static_cast<bool>(hvp_); }
  const std::vector<KnownCriticalPoint>& known_critical_points() const { return known_; }

  // Raw evaluator access. Prefer the checked, counted wrappers in calculus.hpp.
  double raw_value(const ParamVector& theta) const { return value_(theta); }
  ParamVector raw_gradient(const ParamVector& theta) const { return gradient_(theta); }
  ParamVector raw_hvp(const ParamVector& theta, const ParamVector& v) const {
    return hvp_(theta, v);
  }

 private:
  std::string name_;
  Eigen::Index dimension_;
  ValueFn value_;
  GradientFn gradient_;
  HvpFn hvp_;
  std::vector<KnownCriticalPoint> known_;
};

}  // namespace critpt
