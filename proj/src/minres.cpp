#include "critpt/minres.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

int InnerSolveConfig::resolved_max_iterations(Eigen::Index n) const {
  if (max_inner_iterations > 0) return max_inner_iterations;
  return static_cast<int>(std::min<Eigen::Index>(2 * n, 200));
}

void InnerSolveConfig::validate() const {
  if (!(relative_residual_tol > 0.0 && relative_residual_tol < 1.0)) {
    throw DomainError("relative_residual_tol must lie in (0,1)");
  }
  if (max_inner_iterations < 0) throw DomainError("max_inner_iterations must be positive");
  if (!(breakdown_tol > 0.0)) throw DomainError("breakdown_tol must be positive");
}

std::string_view to_string(InnerTermination t) {
  switch (t) {
    case InnerTermination::converged:
      return "converged";
    case InnerTermination::max_iterations:
      return "max_iterations";
    case InnerTermination::breakdown:
      return "breakdown";
  }
  return "unknown";
}

InnerSolveResult minres_solve(const HvpOperator& hvp, const GradientValue& g,
                              const InnerSolveConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = hvp.dimension();
  if (g.vector.size() != n) {
    throw DimensionMismatch(fmt::format("gradient has dimension {}, operator {}", g.vector.size(), n));
  }
  const double beta1 = g.vector.norm();
  if (!(beta1 > 0.0)) {
    throw DomainError("minres_solve needs a nonzero gradient; the outer loop has already converged");
  }
  if (!std::isfinite(beta1)) throw NumericalError("non-finite gradient", 0);

  const int max_iterations = cfg.resolved_max_iterations(n);
  const double target = cfg.relative_residual_tol * beta1;
  const double breakdown = cfg.breakdown_tol * beta1;

  InnerSolveResult out;
  out.direction = ParamVector::Zero(n);
  ParamVector& x = out.direction;

  // Lanczos vectors, right-hand side is -g.
  ParamVector v_prev = ParamVector::Zero(n);
  ParamVector v = -g.vector / beta1;
  double beta = 0.0;  // beta_j coupling v_j to v_{j-1}; zero for j = 1

  // Givens rotations from the previous two steps.
  double c_prev = 1.0, s_prev = 0.0;
  double c = 1.0, s = 0.0;
  ParamVector w_prev2 = ParamVector::Zero(n);
  ParamVector w_prev = ParamVector::Zero(n);
  double eta = beta1;
  double residual = beta1;
  double h_norm = 0.0;  // running estimate of |H| from the Lanczos coefficients

  out.termination = InnerTermination::max_iterations;
  for (int j = 1; j <= max_iterations; ++j) {
    ParamVector p = hvp(v);
    const double alpha = v.dot(p);
    p -= alpha * v + beta * v_prev;
    const double beta_next = p.norm();
    if (!std::isfinite(alpha) || !std::isfinite(beta_next)) {
      throw NumericalError(fmt::format("non-finite Lanczos coefficient at inner iteration {}", j), j);
    }

    h_norm = std::max(h_norm, std::sqrt(alpha * alpha + beta * beta + beta_next * beta_next));

    const double delta = c * alpha - c_prev * s * beta;
    const double rho1 = std::hypot(delta, beta_next);
    const double rho2 = s * alpha + c_prev * c * beta;
    const double rho3 = s_prev * beta;
    if (rho1 <= cfg.breakdown_tol * h_norm) {
      // Singular tridiagonal with an invariant Krylov space: no further progress possible.
      // The test is relative because rounding rarely leaves rho1 exactly zero.
      out.termination = InnerTermination::breakdown;
      break;
    }
    const double c_next = delta / rho1;
    const double s_next = beta_next / rho1;

    ParamVector w = (v - rho3 * w_prev2 - rho2 * w_prev) / rho1;
    x += (c_next * eta) * w;
    residual *= std::abs(s_next);
    eta = -s_next * eta;

    out.residual_trace.push_back(residual);
    out.iterations_used = j;

    if (residual <= target) {
      out.termination = InnerTermination::converged;
      break;
    }
    if (beta_next <= breakdown) {
      out.termination = InnerTermination::breakdown;
      break;
    }

    w_prev2 = std::move(w_prev);
    w_prev = std::move(w);
    v_prev = std::move(v);
    v = p / beta_next;
    beta = beta_next;
    c_prev = c;
    s_prev = s;
    c = c_next;
    s = s_next;
  }

  if (!x.allFinite()) {
    throw NumericalError("non-finite inner-solver iterate", out.iterations_used);
  }
  out.final_residual_norm = (hvp(x) + g.vector).norm();
  if (!(out.final_residual_norm <= beta1)) {
    // Rounding pushed the recomputed residual above the zero step's; fall back to it.
    x.setZero();
    out.final_residual_norm = beta1;
  }
  return out;
}

}  // namespace critpt
