#pragma once

// Scalar Newton-Raphson kernels: Heron's square root, optionally with every
// division replaced by a Newton-Raphson reciprocal iteration.

#include <cstddef>
#include <vector>

namespace critpt::scalar {

struct ScalarIterate {
  double value = 0.0;
  std::size_t step_index = 0;
  double residual = 0.0;  // |b*b - a| for square roots, |1 - b*c| for reciprocals
};

struct ScalarTolerance {
  double epsilon = 1e-24;
  std::size_t max_iterations = 100;

  void validate() const;
};

/// b/2 + a/(2b). Throws DomainError unless both arguments are positive.
double heron_step(double b, double a);

/// c * (2 - c*b). Throws DomainError unless b > 0.
double reciprocal_step(double c, double b);

/// Exactly rounded residuals, computed with a fused multiply-add.
double sqrt_residual(double b, double a);
double reciprocal_residual(double c, double b);

/// Power-of-two starting guess 1/2^k with 2^k the smallest power of two >= b.
/// Built by repeated doubling and halving only.
double reciprocal_initial_guess(double b);

/// Newton-Raphson for 1/b from c0. Stops once |1 - b*c| <= tol.epsilon.
/// c0 must lie in (0, 2/b), otherwise the iteration diverges.
ScalarIterate newton_reciprocal(double b, double c0, const ScalarTolerance& tol,
                                std::vector<ScalarIterate>* trace = nullptr);

/// Heron iteration from b0 = max(1, a), stopping once
/// (b*b - a)^2 <= epsilon * a^2.
///
/// With divide_by_newton set, each a / b_t is evaluated as a * (1 / b_t) with the
/// reciprocal produced by newton_reciprocal to |1 - b_t*c| <= sqrt(epsilon)/4
/// (floored at a few machine epsilons).
ScalarIterate heron_sqrt(double a, const ScalarTolerance& tol, bool divide_by_newton = false,
                         std::vector<ScalarIterate>* trace = nullptr);

}  // namespace critpt::scalar
