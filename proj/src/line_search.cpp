#include "critpt/line_search.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

void LineSearchConfig::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw DomainError("eta0 must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw DomainError("shrink must lie in (0,1)");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0,1)");
  if (max_backtracks < 1) throw DomainError("max_backtracks must be at least 1");
}

double directional_phi(const Problem& problem, const ParamVector& theta,
                       const ParamVector& direction, double eta, EvalCounter* counter) {
  if (direction.size() != theta.size()) throw DimensionMismatch("direction/theta dimension mismatch");
  if (eta == 0.0) return gradient(problem, theta, counter).norm_squared;
  return gradient(problem, theta + eta * direction, counter).norm_squared;
}

LineSearchResult backtrack(const Problem& problem, const ParamVector& theta,
                           const ParamVector& direction, const GradientValue& g,
                           const HvpOperator& hvp_at_theta, const LineSearchConfig& cfg,
                           EvalCounter* counter) {
  cfg.validate();
  if (direction.size() != theta.size() || g.vector.size() != theta.size()) {
    throw DimensionMismatch("line search vectors must share the problem dimension");
  }
  if (direction.squaredNorm() == 0.0) throw DomainError("line search needs a nonzero direction");

  LineSearchResult out;
  out.phi_start = g.norm_squared;
  out.slope = 2.0 * g.vector.dot(hvp_at_theta(direction));
  if (!(out.slope < 0.0)) {
    throw NonDescentDirection(
        fmt::format("direction is not a descent direction for |grad L|^2 (slope {})", out.slope),
        out.slope);
  }

  double eta = cfg.eta0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    if (k > 0) eta = cfg.eta0 * std::pow(cfg.shrink, k);
    double phi = std::numeric_limits<double>::infinity();
    try {
      phi = directional_phi(problem, theta, direction, eta, counter);
    } catch (const EvaluationError&) {
      // non-finite trial: keep shrinking
    }
    out.eta = eta;
    out.phi_end = phi;
    out.trial_count = k + 1;
    if (std::isfinite(phi) && phi <= out.phi_start + cfg.rho * eta * out.slope) {
      out.accepted = true;
      return out;
    }
  }
  return out;
}

}  // namespace critpt
