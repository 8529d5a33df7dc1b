#pragma once

// Backtracking search for the step size along an inner-solver direction, judged on
// phi(eta) = |grad L(theta + eta d)|^2 with an Armijo-type sufficient-decrease test.

#include "critpt/calculus.hpp"

namespace critpt {

struct LineSearchConfig {
  double eta0 = 1.0;
  double shrink = 0.5;
  double rho = 1e-4;
  int max_backtracks = 40;

  void validate() const;
};

struct LineSearchResult {
  double eta = 0.0;
  int trial_count = 0;
  bool accepted = false;
  double phi_start = 0.0;
  double phi_end = 0.0;  // phi at the returned eta (infinity if that trial was non-finite)
  double slope = 0.0;    // D = 2 g^T H d
};

/// |grad L(theta + eta d)|^2.
double directional_phi(const Problem& problem, const ParamVector& theta,
                       const ParamVector& direction, double eta, EvalCounter* counter = nullptr);

/// Tries eta0 * shrink^k for k = 0..max_backtracks and returns the first trial with
/// phi(eta) <= phi(0) + rho * eta * D. D comes from one product with `hvp_at_theta`.
/// Throws NonDescentDirection when D >= 0. Trials whose gradient is non-finite count as
/// failures.
LineSearchResult backtrack(const Problem& problem, const ParamVector& theta,
                           const ParamVector& direction, const GradientValue& g,
                           const HvpOperator& hvp_at_theta, const LineSearchConfig& cfg,
                           EvalCounter* counter = nullptr);

}  // namespace critpt
