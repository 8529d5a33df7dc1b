#include "critpt/drivers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Records rows and owns the per-run counter.
class Recorder {
 public:
  explicit Recorder(const Problem& problem) : problem_(problem), start_(Clock::now()) {}

  EvalCounter* counter() { return &counter_; }

  void record(int iteration, const ParamVector& theta, double loss, double grad_norm_sq,
              double eta, int inner, int trials, bool fallback) {
    const EvalCounts counts = counter_.snapshot();
    trajectory_.records.push_back({iteration, theta, loss, grad_norm_sq, eta, inner, trials,
                                   fallback, counts.gradient, counts.hvp, seconds_since(start_)});
  }

  Trajectory& trajectory() { return trajectory_; }
  const Problem& problem() const { return problem_; }

 private:
  const Problem& problem_;
  Clock::time_point start_;
  EvalCounter counter_;
  Trajectory trajectory_;
};

void check_start(const Problem& problem, const ParamVector& theta0) {
  if (theta0.size() != problem.dimension()) {
    throw DimensionMismatch(fmt::format("theta0 has dimension {}, problem '{}' expects {}",
                                        theta0.size(), problem.name(), problem.dimension()));
  }
  if (!theta0.allFinite()) throw DomainError("theta0 must be finite");
}

CriticalPointReport final_report(const Problem& problem, const ParamVector& theta,
                                 const GradientValue& g, double loss_value, bool converged,
                                 double eps_lambda) {
  CriticalPointReport report;
  if (problem.dimension() <= kDenseHessianCap) {
    report = classify(problem, theta, eps_lambda);
  } else {
    report.theta_final = theta;
  }
  report.loss = loss_value;
  report.grad_norm_sq = g.norm_squared;
  report.converged = converged;
  return report;
}

}  // namespace

void OuterConfig::validate() const {
  if (!(grad_norm_sq_tol > 0.0)) throw DomainError("grad_norm_sq_tol must be positive");
  if (max_outer_iterations < 0) throw DomainError("max_outer_iterations must be >= 0");
  inner.validate();
  line_search.validate();
  if (!(baseline_step > 0.0)) throw DomainError("baseline_step must be positive");
  if (!(divergence_factor > 1.0)) throw DomainError("divergence_factor must exceed 1");
}

std::string_view to_string(CriticalClass c) {
  switch (c) {
    case CriticalClass::minimum:
      return "minimum";
    case CriticalClass::maximum:
      return "maximum";
    case CriticalClass::saddle:
      return "saddle";
    case CriticalClass::degenerate:
      return "degenerate";
    case CriticalClass::unclassified:
      return "unclassified";
  }
  return "unclassified";
}

CriticalClass critical_class_from_string(std::string_view name) {
  for (auto c : {CriticalClass::minimum, CriticalClass::maximum, CriticalClass::saddle,
                 CriticalClass::degenerate, CriticalClass::unclassified}) {
    if (to_string(c) == name) return c;
  }
  throw DomainError(fmt::format("unknown critical-point class '{}'", name));
}

std::string_view to_string(OuterTermination t) {
  switch (t) {
    case OuterTermination::converged:
      return "converged";
    case OuterTermination::max_iterations:
      return "max_iterations";
    case OuterTermination::stalled:
      return "stalled";
  }
  return "unknown";
}

std::string_view to_string(Algorithm a) {
  return a == Algorithm::newton_mr ? "newton-mr" : "gnd";
}

CriticalPointReport classify(const Problem& problem, const ParamVector& theta, double eps_lambda) {
  const Matrix h = dense_hessian(problem, theta);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  const ParamVector& lambda = eig.eigenvalues();

  CriticalPointReport report;
  report.theta_final = theta;
  report.loss = loss(problem, theta);
  report.grad_norm_sq = gradient(problem, theta).norm_squared;
  report.spectrum.assign(lambda.data(), lambda.data() + lambda.size());
  report.eps_lambda =
      eps_lambda > 0.0 ? eps_lambda : 1e-6 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (double l : report.spectrum) {
    if (l < -report.eps_lambda) {
      ++report.morse_index;
    } else if (l > report.eps_lambda) {
      ++report.num_positive;
    } else {
      ++report.num_zero;
    }
  }
  const int n = static_cast<int>(lambda.size());
  if (report.num_zero > 0) {
    report.critical_class = CriticalClass::degenerate;
  } else if (report.morse_index == 0) {
    report.critical_class = CriticalClass::minimum;
  } else if (report.morse_index == n) {
    report.critical_class = CriticalClass::maximum;
  } else {
    report.critical_class = CriticalClass::saddle;
  }
  return report;
}

OuterResult newton_mr(const Problem& problem, const ParamVector& theta0, const OuterConfig& cfg) {
  cfg.validate();
  check_start(problem, theta0);

  Recorder rec(problem);
  EvalCounter* counter = rec.counter();
  OuterResult out;
  ParamVector theta = theta0;
  GradientValue g;
  double loss_value = 0.0;
  try {
    g = gradient(problem, theta, counter);
    loss_value = loss(problem, theta, counter);
    rec.record(0, theta, loss_value, g.norm_squared, 0.0, 0, 0, false);

    int consecutive_failures = 0;
    for (int t = 0;; ++t) {
      if (g.norm_squared < cfg.grad_norm_sq_tol) {
        out.termination = OuterTermination::converged;
        break;
      }
      if (t >= cfg.max_outer_iterations) {
        out.termination = OuterTermination::max_iterations;
        break;
      }

      const HvpOperator op = HvpOperator::at(problem, theta, counter);
      const InnerSolveResult inner = minres_solve(op, g, cfg.inner);
      ParamVector direction = inner.direction;
      bool fallback = direction.squaredNorm() == 0.0;
      LineSearchResult ls;
      if (!fallback) {
        try {
          ls = backtrack(problem, theta, direction, g, op, cfg.line_search, counter);
        } catch (const NonDescentDirection&) {
          fallback = true;
        }
      }
      if (fallback) {
        ++out.fallback_count;
        direction = -2.0 * op(g.vector);
        if (direction.squaredNorm() == 0.0) {
          out.termination = OuterTermination::stalled;
          break;
        }
        try {
          ls = backtrack(problem, theta, direction, g, op, cfg.line_search, counter);
        } catch (const NonDescentDirection&) {
          out.termination = OuterTermination::stalled;
          break;
        }
      }

      if (ls.accepted) {
        consecutive_failures = 0;
      } else {
        // Take the last (tiny) trial only if it still lowers |grad L|^2.
        ++consecutive_failures;
        if (!(ls.phi_end < ls.phi_start) || consecutive_failures >= 2) {
          out.termination = OuterTermination::stalled;
          break;
        }
      }

      theta += ls.eta * direction;
      g = gradient(problem, theta, counter);
      loss_value = loss(problem, theta, counter);
      rec.record(t + 1, theta, loss_value, g.norm_squared, ls.eta, inner.iterations_used,
                 ls.trial_count, fallback);
    }

    out.report = final_report(problem, theta, g, loss_value,
                              out.termination == OuterTermination::converged, cfg.eps_lambda);
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(fmt::format("newton_mr on '{}' failed: {}", problem.name(), e.what()),
                   std::move(rec.trajectory()));
  }
  out.trajectory = std::move(rec.trajectory());
  return out;
}

OuterResult gradient_norm_descent(const Problem& problem, const ParamVector& theta0,
                                  const OuterConfig& cfg) {
  cfg.validate();
  check_start(problem, theta0);
  if (!problem.has_hvp()) {
    throw DomainError(fmt::format(
        "gradient-norm descent on '{}' needs an analytic Hessian-vector product", problem.name()));
  }

  Recorder rec(problem);
  EvalCounter* counter = rec.counter();
  OuterResult out;
  ParamVector theta = theta0;
  GradientValue g;
  double loss_value = 0.0;
  const double alpha = cfg.baseline_step;
  try {
    g = gradient(problem, theta, counter);
    loss_value = loss(problem, theta, counter);
    rec.record(0, theta, loss_value, g.norm_squared, 0.0, 0, 0, false);
    const double blowup = cfg.divergence_factor * g.norm_squared;

    for (int t = 0;; ++t) {
      if (g.norm_squared < cfg.grad_norm_sq_tol) {
        out.termination = OuterTermination::converged;
        break;
      }
      if (t >= cfg.max_outer_iterations) {
        out.termination = OuterTermination::max_iterations;
        break;
      }
      theta -= (2.0 * alpha) * hvp(problem, theta, g.vector, counter);
      try {
        g = gradient(problem, theta, counter);
        loss_value = loss(problem, theta, counter);
      } catch (const EvaluationError&) {
        throw DivergenceError(
            fmt::format("gradient-norm descent on '{}' produced non-finite values at step {}; "
                        "use a smaller baseline_step than {}",
                        problem.name(), t + 1, alpha),
            std::move(rec.trajectory()));
      }
      rec.record(t + 1, theta, loss_value, g.norm_squared, alpha, 0, 0, false);
      if (g.norm_squared > blowup) {
        throw DivergenceError(
            fmt::format("gradient-norm descent on '{}' diverged at step {} (|grad L|^2 = {}); "
                        "use a smaller baseline_step than {}",
                        problem.name(), t + 1, g.norm_squared, alpha),
            std::move(rec.trajectory()));
      }
    }
    out.report = final_report(problem, theta, g, loss_value,
                              out.termination == OuterTermination::converged, cfg.eps_lambda);
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(
        fmt::format("gradient-norm descent on '{}' failed: {}", problem.name(), e.what()),
        std::move(rec.trajectory()));
  }
  out.trajectory = std::move(rec.trajectory());
  return out;
}

std::vector<ParamVector> sample_starts(const SamplerSpec& sampler, Eigen::Index dimension,
                                       int count) {
  auto bound = [&](const std::vector<double>& b, Eigen::Index i, const char* name) {
    if (b.size() == 1) return b.front();
    if (static_cast<Eigen::Index>(b.size()) != dimension) {
      throw DimensionMismatch(fmt::format("sampler {} bound needs 1 or {} entries, got {}", name,
                                          dimension, b.size()));
    }
    return b[static_cast<std::size_t>(i)];
  };
  std::vector<double> lo(dimension), hi(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) {
    lo[i] = bound(sampler.lower, i, "lower");
    hi[i] = bound(sampler.upper, i, "upper");
    if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw DomainError(fmt::format("sampler bounds [{}, {}] are invalid", lo[i], hi[i]));
    }
  }
  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ParamVector> starts;
  starts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int r = 0; r < count; ++r) {
    ParamVector theta(dimension);
    for (Eigen::Index i = 0; i < dimension; ++i) theta[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    starts.push_back(std::move(theta));
  }
  return starts;
}

std::vector<Cluster> cluster_reports(const std::vector<StartRun>& runs, double radius_rel) {
  std::vector<Cluster> clusters;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].converged()) continue;
    const ParamVector& theta = runs[r].result.report.theta_final;
    bool placed = false;
    for (auto& cluster : clusters) {
      const ParamVector& rep = cluster.representative.theta_final;
      if ((theta - rep).norm() < radius_rel * (1.0 + rep.norm())) {
        cluster.members.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({runs[r].result.report, r, {r}});
  }
  return clusters;
}

MultiStartResult multi_start(const Problem& problem, const MultiStartConfig& cfg) {
  if (cfg.count < 1) throw DomainError("multi-start count must be at least 1");
  if (!(cfg.cluster_radius_rel > 0.0)) throw DomainError("cluster radius must be positive");
  cfg.outer.validate();

  MultiStartResult out;
  const std::vector<ParamVector> starts = sample_starts(cfg.sampler, problem.dimension(), cfg.count);
  out.runs.resize(starts.size());

  auto execute = [&](std::size_t r) {
    StartRun& run = out.runs[r];
    run.theta0 = starts[r];
    const auto start = Clock::now();
    try {
      run.result = cfg.algorithm == Algorithm::newton_mr
                       ? newton_mr(problem, starts[r], cfg.outer)
                       : gradient_norm_descent(problem, starts[r], cfg.outer);
    } catch (const RunError& e) {
      run.error = e.what();
      run.result.trajectory = e.trajectory();
      run.result.termination = OuterTermination::stalled;
    }
    run.wall_seconds = seconds_since(start);
  };

  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(starts.size()));
  if (threads <= 1) {
    for (std::size_t r = 0; r < starts.size(); ++r) execute(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next.fetch_add(1); r < starts.size(); r = next.fetch_add(1)) {
          execute(r);
        }
      });
    }
  }

  for (std::size_t r = 0; r < out.runs.size(); ++r) {
    if (!out.runs[r].converged()) out.non_converged.push_back(r);
  }
  out.clusters = cluster_reports(out.runs, cfg.cluster_radius_rel);
  return out;
}

}  // namespace critpt
