#include "critpt/calculus.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

namespace {

void check_dimension(const Problem& problem, const ParamVector& v, const char* what) {
  if (v.size() != problem.dimension()) {
    throw DimensionMismatch(fmt::format("{}: {} has dimension {}, problem '{}' expects {}", what,
                                        what, v.size(), problem.name(), problem.dimension()));
  }
}

ParamVector checked_raw_gradient(const Problem& problem, const ParamVector& theta) {
  ParamVector g = problem.raw_gradient(theta);
  if (g.size() != problem.dimension()) {
    throw DimensionMismatch(fmt::format("problem '{}' returned a gradient of dimension {}",
                                        problem.name(), g.size()));
  }
  if (!g.allFinite()) {
    throw EvaluationError(
        fmt::format("non-finite gradient from problem '{}'", problem.name()), theta);
  }
  return g;
}

ParamVector fd_directional_gradient(const Problem& problem, const ParamVector& theta,
                                    const ParamVector& v, double h) {
  const double norm = v.norm();
  if (norm == 0.0) return ParamVector::Zero(v.size());
  const double t = h / norm;
  const ParamVector plus = checked_raw_gradient(problem, theta + t * v);
  const ParamVector minus = checked_raw_gradient(problem, theta - t * v);
  return (plus - minus) / (2.0 * t);
}

}  // namespace

double default_fd_step(const ParamVector& theta) { return 1e-5 * (1.0 + theta.norm()); }

double loss(const Problem& problem, const ParamVector& theta, EvalCounter* counter) {
  check_dimension(problem, theta, "theta");
  if (counter) counter->add_value();
  const double value = problem.raw_value(theta);
  if (!std::isfinite(value)) {
    throw EvaluationError(fmt::format("non-finite loss from problem '{}'", problem.name()),
                          theta);
  }
  return value;
}

GradientValue gradient(const Problem& problem, const ParamVector& theta, EvalCounter* counter) {
  check_dimension(problem, theta, "theta");
  if (counter) counter->add_gradient();
  return GradientValue::from(checked_raw_gradient(problem, theta));
}

ParamVector hvp(const Problem& problem, const ParamVector& theta, const ParamVector& v,
                EvalCounter* counter) {
  check_dimension(problem, theta, "theta");
  check_dimension(problem, v, "v");
  if (counter) counter->add_hvp();
  if (!problem.has_hvp()) {
    return fd_directional_gradient(problem, theta, v, default_fd_step(theta));
  }
  ParamVector hv = problem.raw_hvp(theta, v);
  if (hv.size() != problem.dimension()) {
    throw DimensionMismatch(fmt::format("problem '{}' returned an HVP of dimension {}",
                                        problem.name(), hv.size()));
  }
  if (!hv.allFinite()) {
    throw EvaluationError(
        fmt::format("non-finite Hessian-vector product from problem '{}'", problem.name()),
        theta);
  }
  return hv;
}

HvpOperator::HvpOperator(Eigen::Index dimension, Apply apply)
    : dimension_(dimension), apply_(std::move(apply)) {}

HvpOperator HvpOperator::at(const Problem& problem, const ParamVector& theta,
                            EvalCounter* counter) {
  check_dimension(problem, theta, "theta");
  return HvpOperator(problem.dimension(), [&problem, theta, counter](const ParamVector& v) {
    return hvp(problem, theta, v, counter);
  });
}

HvpOperator HvpOperator::from_matrix(Matrix matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionMismatch("operator matrix must be square");
  const Eigen::Index n = matrix.rows();
  return HvpOperator(n, [m = std::move(matrix)](const ParamVector& v) -> ParamVector {
    return m * v;
  });
}

ParamVector HvpOperator::operator()(const ParamVector& v) const {
  if (v.size() != dimension_) {
    throw DimensionMismatch(
        fmt::format("operator of dimension {} applied to a vector of dimension {}", dimension_,
                    v.size()));
  }
  ++evaluations_;
  return apply_(v);
}

double fd_gradient_check(const Problem& problem, const ParamVector& theta, double h) {
  if (!(h > 0.0)) throw DomainError(fmt::format("finite-difference step must be > 0 (h={})", h));
  check_dimension(problem, theta, "theta");
  const ParamVector g = checked_raw_gradient(problem, theta);
  double worst = 0.0;
  ParamVector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = problem.raw_value(probe);
    probe[i] = theta[i] - h;
    const double down = problem.raw_value(probe);
    probe[i] = theta[i];
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(g[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(g[i] - fd) / scale);
  }
  return worst;
}

double fd_hvp_check(const Problem& problem, const ParamVector& theta, const ParamVector& v,
                    double h) {
  if (!(h > 0.0)) throw DomainError(fmt::format("finite-difference step must be > 0 (h={})", h));
  const ParamVector hv = hvp(problem, theta, v);
  const ParamVector fd = fd_directional_gradient(problem, theta, v, h);
  return (hv - fd).norm() / std::max(1.0, hv.norm());
}

Matrix dense_hessian(const Problem& problem, const ParamVector& theta, EvalCounter* counter) {
  const Eigen::Index n = problem.dimension();
  if (n > kDenseHessianCap) {
    throw CapacityError(fmt::format(
        "dense Hessian requested for dimension {} (cap {}); use an iterative spectrum "
        "estimate instead",
        n, kDenseHessianCap));
  }
  check_dimension(problem, theta, "theta");
  Matrix m(n, n);
  ParamVector e = ParamVector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    m.col(j) = hvp(problem, theta, e, counter);
    e[j] = 0.0;
  }
  return 0.5 * (m + m.transpose());
}

}  // namespace critpt
