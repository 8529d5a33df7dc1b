#include "critpt/scalar_newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt::scalar {

void ScalarTolerance::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be a positive finite number");
  }
  if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
}

double heron_step(double b, double a) {
  if (!(b > 0.0) || !(a > 0.0)) {
    throw DomainError(fmt::format("heron_step requires b > 0 and a > 0 (b={}, a={})", b, a));
  }
  return 0.5 * b + 0.5 * (a / b);
}

double reciprocal_step(double c, double b) {
  if (!(b > 0.0)) throw DomainError(fmt::format("reciprocal_step requires b > 0 (b={})", b));
  return c * (2.0 - c * b);
}

double sqrt_residual(double b, double a) { return std::abs(std::fma(b, b, -a)); }

double reciprocal_residual(double c, double b) { return std::abs(std::fma(-b, c, 1.0)); }

double reciprocal_initial_guess(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw DomainError(fmt::format("reciprocal_initial_guess requires finite b > 0 (b={})", b));
  }
  double power = 1.0;
  double guess = 1.0;
  while (power < b) {
    power *= 2.0;
    guess *= 0.5;
  }
  while (power * 0.5 >= b) {
    power *= 0.5;
    guess *= 2.0;
  }
  return guess;
}

ScalarIterate newton_reciprocal(double b, double c0, const ScalarTolerance& tol,
                                std::vector<ScalarIterate>* trace) {
  tol.validate();
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw DomainError(fmt::format("newton_reciprocal requires finite b > 0 (b={})", b));
  }
  // Basin of attraction: 0 < b*c0 < 2.
  const double scaled = b * c0;
  if (!(scaled > 0.0 && scaled < 2.0)) {
    throw DomainError(fmt::format(
        "newton_reciprocal: c0={} lies outside (0, 2/b) for b={}; the iteration diverges", c0, b));
  }

  ScalarIterate it{c0, 0, reciprocal_residual(c0, b)};
  ScalarIterate best = it;
  if (trace) trace->push_back(it);
  while (it.residual > tol.epsilon) {
    if (it.step_index >= tol.max_iterations) {
      throw NonConvergenceError(
          fmt::format("newton_reciprocal did not reach |1 - b*c| <= {} within {} steps "
                      "(best residual {})",
                      tol.epsilon, tol.max_iterations, best.residual),
          best.value, best.residual, it.step_index);
    }
    it.value = reciprocal_step(it.value, b);
    it.residual = reciprocal_residual(it.value, b);
    ++it.step_index;
    if (it.residual < best.residual) best = it;
    if (trace) trace->push_back(it);
  }
  return it;
}

ScalarIterate heron_sqrt(double a, const ScalarTolerance& tol, bool divide_by_newton,
                         std::vector<ScalarIterate>* trace) {
  tol.validate();
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError(fmt::format("heron_sqrt requires finite a > 0 (a={})", a));
  }

  const double scale = std::max(1.0, a);
  const double threshold = tol.epsilon * a * a;
  const ScalarTolerance reciprocal_tol{
      std::max(0.25 * std::sqrt(tol.epsilon), 4.0 * std::numeric_limits<double>::epsilon()),
      tol.max_iterations};

  auto squared_residual = [a](double b) {
    const double r = sqrt_residual(b, a);
    return r * r;
  };

  ScalarIterate it{scale, 0, sqrt_residual(scale, a)};
  ScalarIterate best = it;
  if (trace) trace->push_back(it);
  while (squared_residual(it.value) > threshold) {
    if (it.step_index >= tol.max_iterations) {
      throw NonConvergenceError(
          fmt::format("heron_sqrt({}) did not reach (b*b - a)^2 <= {} within {} steps "
                      "(best |b*b - a| = {})",
                      a, threshold, tol.max_iterations, best.residual),
          best.value, best.residual, it.step_index);
    }
    const double b = it.value;
    if (divide_by_newton) {
      const double inverse =
          newton_reciprocal(b, reciprocal_initial_guess(b), reciprocal_tol).value;
      it.value = 0.5 * b + 0.5 * (a * inverse);
    } else {
      it.value = heron_step(b, a);
    }
    it.residual = sqrt_residual(it.value, a);
    ++it.step_index;
    if (it.residual < best.residual) best = it;
    if (trace) trace->push_back(it);
  }
  return it;
}

}  // namespace critpt::scalar
