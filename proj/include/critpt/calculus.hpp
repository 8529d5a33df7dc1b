#pragma once

// Derivative oracle: counted gradient/HVP evaluation, finite-difference checks,
// and dense Hessian assembly for small problems.

#include <cstdint>
#include <functional>

#include "critpt/problem.hpp"

namespace critpt {

/// Largest dimension for which dense_hessian will assemble the full matrix.
inline constexpr Eigen::Index kDenseHessianCap = 512;

struct GradientValue {
  ParamVector vector;
  double norm_squared = 0.0;

  static GradientValue from(ParamVector v) {
    const double sq = v.squaredNorm();
    return {std::move(v), sq};
  }
};

/// Central-difference step 1e-5 * (1 + |theta|).
double default_fd_step(const ParamVector& theta);

double loss(const Problem& problem, const ParamVector& theta, EvalCounter* counter = nullptr);

GradientValue gradient(const Problem& problem, const ParamVector& theta,
                       EvalCounter* counter = nullptr);

/// H(theta) v. Uses the analytic product when the problem has one, otherwise a central
/// difference of gradients along v.
ParamVector hvp(const Problem& problem, const ParamVector& theta, const ParamVector& v,
                EvalCounter* counter = nullptr);

/// The map v -> H v at a fixed point. Counts its own applications.
class HvpOperator {
 public:
  using Apply = std::function<ParamVector(const ParamVector&)>;

  HvpOperator(Eigen::Index dimension, Apply apply);

  /// Operator for H(theta) of a problem; applications also land in `counter`.
  static HvpOperator at(const Problem& problem, const ParamVector& theta,
                        EvalCounter* counter = nullptr);

  /// Operator for an explicit symmetric matrix.
  static HvpOperator from_matrix(Matrix matrix);

  ParamVector operator()(const ParamVector& v) const;

  Eigen::Index dimension() const { return dimension_; }
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  Eigen::Index dimension_;
  Apply apply_;
  mutable std::uint64_t evaluations_ = 0;
};

/// Max over coordinates of |g_i - fd_i| / max(1, |g_i|, |fd_i|) with fd the central
/// difference of the loss. Throws DomainError for h <= 0.
double fd_gradient_check(const Problem& problem, const ParamVector& theta, double h);

/// |H v - fd| / max(1, |H v|) where fd is the central difference of gradients along v.
double fd_hvp_check(const Problem& problem, const ParamVector& theta, const ParamVector& v,
                    double h);

/// Column j is hvp(e_j); the result is symmetrized. Throws CapacityError above the cap.
Matrix dense_hessian(const Problem& problem, const ParamVector& theta,
                     EvalCounter* counter = nullptr);

}  // namespace critpt
