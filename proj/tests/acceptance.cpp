// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "critpt/calculus.hpp"
#include "critpt/config.hpp"
#include "critpt/drivers.hpp"
#include "critpt/minres.hpp"
#include "critpt/persistence.hpp"
#include "critpt/problems.hpp"
#include "critpt/scalar_newton.hpp"
#include "oracles.hpp"

using namespace critpt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Problem autoencoder_421() {
  const Matrix basis = problems::random_orthogonal(3, 0);
  return problems::make_linear_autoencoder(
      {problems::autoencoder_data({4.0, 2.0, 1.0}, basis, 3, 1), 1});
}

Outcome scalar_suite() {
  const auto t0 = Clock::now();
  double worst_sqrt = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = 1e-6 * std::pow(1e12, i / 99.0);
    const double b = scalar::heron_sqrt(a, {1e-24, 200}).value;
    worst_sqrt = std::max(worst_sqrt, std::abs(b * b - a) / a);
  }
  const double ulp = std::numeric_limits<double>::epsilon();
  double worst_recip = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = 1e-6 * std::pow(1e12, i / 99.0);
    std::vector<scalar::ScalarIterate> trace;
    scalar::newton_reciprocal(b, scalar::reciprocal_initial_guess(b), {1e-15, 100}, &trace);
    for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
      const double e = std::fma(-b, trace[t].value, 1.0);
      const double e_next = std::fma(-b, trace[t + 1].value, 1.0);
      worst_recip = std::max(worst_recip, std::abs(e_next - e * e) / ulp);
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_sqrt <= 1e-10 && worst_recip <= 4.0 && elapsed < 1.0,
          fmt::format("max |b^2-a|/a = {:.3g} (<= 1e-10), max error-squaring defect = {:.3g} ulp "
                      "(<= 4), {:.3f} s (< 1 s)",
                      worst_sqrt, worst_recip, elapsed)};
}

Outcome derivative_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::vector<Problem> catalog{
      problems::make_quadratic({oracle::random_symmetric(5, rng), oracle::random_vector(5, rng)}),
      problems::make_himmelblau(), autoencoder_421()};
  catalog.push_back(problems::make_linear_autoencoder(
      {problems::autoencoder_data({5.0, 3.0, 2.0, 1.0}, problems::random_orthogonal(4, 1), 6, 2), 2}));
  catalog.push_back(problems::make_surrogate(catalog[1]));
  double worst_grad = 0.0, worst_hvp = 0.0;
  for (const Problem& p : catalog) {
    const int n = static_cast<int>(p.dimension());
    for (int i = 0; i < 10; ++i) {
      const ParamVector theta = oracle::random_vector(n, rng);
      const ParamVector v = oracle::random_vector(n, rng);
      const double h = default_fd_step(theta);
      worst_grad = std::max(worst_grad, fd_gradient_check(p, theta, h));
      worst_hvp = std::max(worst_hvp, fd_hvp_check(p, theta, v, h));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_grad <= 1e-4 && worst_hvp <= 1e-4 && elapsed < 5.0,
          fmt::format("{} problems, worst gradient error {:.3g}, worst HVP error {:.3g} (<= 1e-4), "
                      "{:.3f} s (< 5 s)",
                      catalog.size(), worst_grad, worst_hvp, elapsed)};
}

Outcome inner_solver_exactness() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(2, 50);
  double worst = 0.0;
  int upticks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    const Matrix h = oracle::random_symmetric(n, rng);
    const ParamVector g = oracle::random_vector(n, rng);
    InnerSolveConfig cfg;
    cfg.relative_residual_tol = 1e-12;
    cfg.max_inner_iterations = 4 * n;
    const InnerSolveResult r = minres_solve(HvpOperator::from_matrix(h), GradientValue::from(g), cfg);
    const ParamVector direct = h.partialPivLu().solve(-g);
    worst = std::max(worst, (r.direction - direct).norm() / direct.norm());
    const auto& trace = minres_residual_trace(r);
    for (std::size_t k = 1; k < trace.size(); ++k) {
      if (trace[k] > trace[k - 1] * (1.0 + 1e-12)) ++upticks;
    }
  }
  return {worst <= 1e-8 && upticks == 0,
          fmt::format("50 systems, worst relative error vs LU {:.3g} (<= 1e-8), trace upticks {}",
                      worst, upticks)};
}

Outcome one_step_newton() {
  std::mt19937_64 rng(4);
  OuterConfig cfg;
  cfg.inner.relative_residual_tol = 1e-12;
  cfg.grad_norm_sq_tol = 1e-20;
  int good = 0;
  double worst_g2 = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 9;
    const Problem q = problems::make_quadratic(
        {oracle::random_symmetric(n, rng), oracle::random_vector(n, rng)});
    const OuterResult r = newton_mr(q, oracle::random_vector(n, rng, 2.0), cfg);
    const auto& rec = r.trajectory.records;
    worst_g2 = std::max(worst_g2, rec.back().grad_norm_sq);
    if (rec.size() == 2 && rec[1].eta == 1.0 && rec[1].grad_norm_sq <= 1e-20 &&
        r.termination == OuterTermination::converged) {
      ++good;
    }
  }
  return {good == 20, fmt::format("{}/20 quadratics solved in one step with eta = 1, worst final "
                                  "|grad|^2 {:.3g} (<= 1e-20)",
                                  good, worst_g2)};
}

Outcome himmelblau_census() {
  const auto t0 = Clock::now();
  const RunConfig cfg = parse_config(R"({"problem": "himmelblau", "multi_start": {"count": 1000, "seed": 0}})");
  const MultiStartResult r = multi_start(build_problem(cfg.problem), cfg.run);
  const double elapsed = seconds_since(t0);
  const auto expected = oracle::himmelblau_critical_points();
  int minima = 0, saddles = 0, maxima = 0, matched = 0;
  bool minima_low = true;
  std::vector<bool> covered(expected.size(), false);
  for (const auto& c : r.clusters) {
    const auto& rep = c.representative;
    if (rep.critical_class == CriticalClass::minimum) {
      ++minima;
      minima_low = minima_low && rep.loss <= 1e-12;
    }
    saddles += rep.critical_class == CriticalClass::saddle;
    maxima += rep.critical_class == CriticalClass::maximum;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      const double dist = (expected[k].theta - rep.theta_final).cwiseAbs().maxCoeff();
      if (dist <= 1e-6 && expected[k].morse_index == rep.morse_index && !covered[k]) {
        covered[k] = true;
        ++matched;
        break;
      }
    }
  }
  const bool pass = r.clusters.size() == 9 && minima == 4 && saddles == 4 && maxima == 1 &&
                    minima_low && matched == 9 && expected.size() == 9 && elapsed < 30.0;
  return {pass, fmt::format("{} clusters ({} minima, {} saddles, {} maxima), {}/9 matched to the "
                            "grid oracle within 1e-6, {} non-converged, {:.2f} s (< 30 s)",
                            r.clusters.size(), minima, saddles, maxima, matched,
                            r.non_converged.size(), elapsed)};
}

Outcome autoencoder_landscape() {
  const Problem p = autoencoder_421();
  const std::vector<double> desc{4.0, 2.0, 1.0};
  double worst_known = 0.0;
  for (const auto& cp : p.known_critical_points()) {
    worst_known = std::max(worst_known, gradient(p, cp.theta).norm_squared);
  }
  // loss -> predicted Morse index
  std::vector<std::pair<double, int>> levels{{7.0, oracle::autoencoder_k1_morse_index(desc, -1)}};
  for (int i = 0; i < 3; ++i) levels.push_back({7.0 - desc[i], oracle::autoencoder_k1_morse_index(desc, i)});

  MultiStartConfig cfg;
  cfg.count = 100;
  cfg.sampler = {{-1.0}, {1.0}, 6};
  const MultiStartResult r = multi_start(p, cfg);
  int converged = 0, off_level = 0, index_mismatch = 0;
  std::vector<int> hits(levels.size(), 0);
  for (const auto& run : r.runs) {
    if (!run.converged()) continue;
    ++converged;
    const auto& rep = run.result.report;
    bool found = false;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (std::abs(rep.loss - levels[k].first) <= 1e-6) {
        found = true;
        ++hits[k];
        if (rep.morse_index != levels[k].second) ++index_mismatch;
      }
    }
    if (!found) ++off_level;
  }
  const bool pass = worst_known <= 1e-16 && converged > 0 && off_level == 0 && index_mismatch == 0;
  return {pass, fmt::format("constructed points max |grad|^2 {:.3g} (<= 1e-16); {}/100 converged; "
                            "hits at loss 3/5/6/7 = {}/{}/{}/{}; off-level {}, index mismatches {}",
                            worst_known, converged, hits[1], hits[2], hits[3], hits[0], off_level,
                            index_mismatch)};
}

Outcome outperformance() {
  const Problem p = autoencoder_421();
  const auto starts = sample_starts({{-1.0}, {1.0}, 7}, p.dimension(), 20);
  const double inf = std::numeric_limits<double>::infinity();

  OuterConfig nmr;
  std::vector<double> nmr_iters;
  for (const auto& s : starts) {
    const OuterResult r = newton_mr(p, s, nmr);
    nmr_iters.push_back(r.termination == OuterTermination::converged
                            ? static_cast<double>(r.trajectory.records.size() - 1)
                            : inf);
  }
  const double nmr_median = median(nmr_iters);

  double best_gnd = inf;
  double best_alpha = 0.0;
  for (double alpha : {1e-1, 1e-2, 1e-3, 1e-4}) {
    OuterConfig gcfg;
    gcfg.baseline_step = alpha;
    gcfg.max_outer_iterations = 20000;
    std::vector<double> iters;
    for (const auto& s : starts) {
      try {
        const OuterResult r = gradient_norm_descent(p, s, gcfg);
        iters.push_back(r.termination == OuterTermination::converged
                            ? static_cast<double>(r.trajectory.records.size() - 1)
                            : inf);
      } catch (const RunError&) {
        iters.push_back(inf);
      }
    }
    const double m = median(iters);
    if (m < best_gnd || best_alpha == 0.0) {
      best_gnd = m;
      best_alpha = alpha;
    }
  }

  // GND on diag(kappa, 1) with alpha = 1 / (2 kappa^2) from (1, 1).
  auto gnd_steps = [](double kappa) {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 0) = kappa;
    OuterConfig c;
    c.baseline_step = 1.0 / (2.0 * kappa * kappa);
    c.grad_norm_sq_tol = 1e-16;
    c.max_outer_iterations = 1000000;
    const OuterResult r = gradient_norm_descent(problems::make_quadratic({a, {}}),
                                                ParamVector::Ones(2), c);
    return static_cast<double>(r.trajectory.records.size() - 1);
  };
  const double steps4 = gnd_steps(4.0);
  const double steps8 = gnd_steps(8.0);
  const double ratio = steps8 / steps4;
  const bool pass = nmr_median < best_gnd && ratio >= 2.0 && ratio <= 8.0;
  return {pass, fmt::format("Newton-MR median {} vs GND best median {} (alpha {:g}); GND steps "
                            "kappa=4: {}, kappa=8: {}, ratio {:.3f} (within [2, 8] of predicted 4)",
                            nmr_median, best_gnd, best_alpha, steps4, steps8, ratio)};
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "critpt-acceptance-determinism";
  std::size_t files = 0, differing = 0;
  for (const char* text :
       {R"({"problem": "himmelblau", "multi_start": {"count": 50, "seed": 11, "threads": 4}})",
        R"({"problem": "linear-autoencoder", "algorithm": "gnd", "outer": {"baseline_step": 0.01, "max_outer_iterations": 300}, "multi_start": {"count": 10, "seed": 2}})"}) {
    RunConfig cfg = parse_config(text);
    fs::remove_all(root);
    cfg.output_dir = (root / "a").string();
    const RunArtifacts a = execute_run(cfg);
    cfg.output_dir = (root / "b").string();
    const RunArtifacts b = execute_run(cfg);
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
      ++files;
      if (i >= b.trajectories.size() || slurp(a.trajectories[i]) != slurp(b.trajectories[i])) ++differing;
    }
    if (a.trajectories.size() != b.trajectories.size()) ++differing;
  }
  fs::remove_all(root);
  return {files > 0 && differing == 0,
          fmt::format("{} trajectory files compared across two executions, {} differ", files, differing)};
}

}  // namespace

int main() {
  // The output directory override would send both determinism runs to one place.
  ::unsetenv(kOutputDirEnv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"scalar oracle suite", scalar_suite},
      {"derivative correctness", derivative_correctness},
      {"inner-solver exactness", inner_solver_exactness},
      {"one-step Newton on quadratics", one_step_newton},
      {"Himmelblau critical-point census", himmelblau_census},
      {"linear-autoencoder landscape", autoencoder_landscape},
      {"outperformance over gradient-norm descent", outperformance},
      {"determinism", determinism},
  };
  const auto t0 = Clock::now();
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !o.pass;
    fmt::print("criterion {}: {} {}: {}\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("total {:.2f} s, {} of {} criteria failed\n", seconds_since(t0), failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
