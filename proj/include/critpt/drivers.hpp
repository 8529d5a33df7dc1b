#pragma once

// Outer critical-point finders and spectral classification of their end points.
//
// newton_mr: theta_{t+1} = theta_t + eta_t d_t, with d_t the MINRES least-squares
// solution of H d = -g and eta_t from backtracking on |grad L|^2.
// gradient_norm_descent: fixed-step descent on g(theta) = |grad L(theta)|^2.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "critpt/calculus.hpp"
#include "critpt/line_search.hpp"
#include "critpt/minres.hpp"

namespace critpt {

struct OuterConfig {
  double grad_norm_sq_tol = 1e-16;
  int max_outer_iterations = 500;
  InnerSolveConfig inner;
  LineSearchConfig line_search;
  double baseline_step = 1e-2;
  double eps_lambda = 0.0;  // <= 0 selects 1e-6 * max(1, max |lambda|)
  double divergence_factor = 1e12;

  void validate() const;
};

struct TrajectoryRecord {
  int iteration = 0;
  ParamVector theta;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  double eta = 0.0;
  int inner_iterations = 0;
  int line_search_trials = 0;
  bool fallback = false;  // steepest descent on |grad L|^2 replaced the inner direction
  std::uint64_t gradient_evals = 0;
  std::uint64_t hvp_evals = 0;
  double wall_seconds = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
};

enum class CriticalClass { minimum, maximum, saddle, degenerate, unclassified };

std::string_view to_string(CriticalClass c);
CriticalClass critical_class_from_string(std::string_view name);

struct CriticalPointReport {
  ParamVector theta_final;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  std::vector<double> spectrum;  // ascending; empty when unclassified
  double eps_lambda = 0.0;
  int morse_index = 0;
  int num_zero = 0;
  int num_positive = 0;
  CriticalClass critical_class = CriticalClass::unclassified;
  bool converged = false;
};

enum class OuterTermination { converged, max_iterations, stalled };

std::string_view to_string(OuterTermination t);

struct OuterResult {
  Trajectory trajectory;
  CriticalPointReport report;
  OuterTermination termination = OuterTermination::max_iterations;
  int fallback_count = 0;
};

/// A failure inside an outer run, with the trajectory recorded up to that point.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, Trajectory so_far)
      : std::runtime_error(what), trajectory_(std::move(so_far)) {}
  const Trajectory& trajectory() const { return trajectory_; }

 private:
  Trajectory trajectory_;
};

/// Gradient-norm descent blew up; retry with a smaller baseline_step.
class DivergenceError : public RunError {
 public:
  using RunError::RunError;
};

/// Dense spectrum at theta, bucketed against +-eps_lambda (eps_lambda <= 0 picks the
/// relative default). Throws CapacityError above the dense cap.
CriticalPointReport classify(const Problem& problem, const ParamVector& theta,
                             double eps_lambda = 0.0);

OuterResult newton_mr(const Problem& problem, const ParamVector& theta0, const OuterConfig& cfg);

OuterResult gradient_norm_descent(const Problem& problem, const ParamVector& theta0,
                                  const OuterConfig& cfg);

enum class Algorithm { newton_mr, gradient_norm_descent };

std::string_view to_string(Algorithm a);

/// Uniform box sampler. Bounds of size 1 are broadcast to every coordinate.
struct SamplerSpec {
  std::vector<double> lower{-1.0};
  std::vector<double> upper{1.0};
  std::uint64_t seed = 0;
};

/// Draws `count` starting points in run-index order from one seeded stream.
std::vector<ParamVector> sample_starts(const SamplerSpec& sampler, Eigen::Index dimension,
                                       int count);

struct MultiStartConfig {
  Algorithm algorithm = Algorithm::newton_mr;
  OuterConfig outer;
  int count = 1;
  SamplerSpec sampler;
  double cluster_radius_rel = 1e-4;  // radius = rel * (1 + |representative|)
  int threads = 1;                   // 0 uses the hardware concurrency
};

struct StartRun {
  ParamVector theta0;
  OuterResult result;
  std::string error;  // non-empty when the run threw (divergence, evaluation failure)
  double wall_seconds = 0.0;

  bool converged() const { return error.empty() && result.report.converged; }
};

struct Cluster {
  CriticalPointReport representative;
  std::size_t representative_run = 0;
  std::vector<std::size_t> members;

  std::size_t hits() const { return members.size(); }
};

struct MultiStartResult {
  std::vector<StartRun> runs;
  std::vector<Cluster> clusters;         // in order of first appearance
  std::vector<std::size_t> non_converged;  // run indices
};

/// Greedy clustering of converged end points in run-index order.
std::vector<Cluster> cluster_reports(const std::vector<StartRun>& runs, double radius_rel);

MultiStartResult multi_start(const Problem& problem, const MultiStartConfig& cfg);

}  // namespace critpt
