#include "critpt/problem.hpp"

#include <cmath>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

ParamVector make_param(std::span<const double> coordinates) {
  ParamVector v(static_cast<Eigen::Index>(coordinates.size()));
  for (std::size_t i = 0; i < coordinates.size(); ++i) {
    if (!std::isfinite(coordinates[i])) {
      throw DomainError(fmt::format("coordinate {} is not finite ({})", i, coordinates[i]));
    }
    v[static_cast<Eigen::Index>(i)] = coordinates[i];
  }
  return v;
}

ParamVector make_param(std::initializer_list<double> coordinates) {
  return make_param(std::span<const double>(coordinates.begin(), coordinates.size()));
}

bool all_finite(const ParamVector& v) { return v.allFinite(); }

Problem::Problem(std::string name, Eigen::Index dimension, ValueFn value, GradientFn gradient,
                 HvpFn hvp, std::vector<KnownCriticalPoint> known_critical_points)
    : name_(std::move(name)),
      dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hvp_(std::move(hvp)),
      known_(std::move(known_critical_points)) {
  if (dimension_ < 1) throw DomainError("problem dimension must be positive");
  if (!value_ || !gradient_) throw DomainError("problem needs value and gradient evaluators");
  for (const auto& cp : known_) {
    if (cp.theta.size() != dimension_) {
      throw DimensionMismatch("known critical point has the wrong dimension");
    }
  }
}

}  // namespace critpt
