#pragma once

// MINRES for the Newton system H d = -g, driven only by Hessian-vector products.
// Minimizes |H d + g| over the growing Krylov space span{g, Hg, H^2 g, ...}, so it
// tolerates indefinite and singular H.

#include <string_view>
#include <vector>

#include "critpt/calculus.hpp"

namespace critpt {

struct InnerSolveConfig {
  double relative_residual_tol = 1e-4;
  int max_inner_iterations = 0;  // 0 means min(2n, 200)
  double breakdown_tol = 1e-13;  // relative to |g|

  int resolved_max_iterations(Eigen::Index n) const;
  void validate() const;
};

enum class InnerTermination { converged, max_iterations, breakdown };

std::string_view to_string(InnerTermination t);

struct InnerSolveResult {
  ParamVector direction;
  double final_residual_norm = 0.0;  // recomputed |H d + g|
  int iterations_used = 0;
  InnerTermination termination = InnerTermination::converged;
  std::vector<double> residual_trace;  // recurrence estimate of |H d_k + g|, one per iteration
};

/// Throws DomainError for a zero gradient and NumericalError on NaN/Inf.
InnerSolveResult minres_solve(const HvpOperator& hvp, const GradientValue& g,
                              const InnerSolveConfig& cfg);

/// Per-iteration residual norms of a completed solve.
inline const std::vector<double>& minres_residual_trace(const InnerSolveResult& result) {
  return result.residual_trace;
}

}  // namespace critpt
