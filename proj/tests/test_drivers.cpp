#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "critpt/drivers.hpp"
#include "critpt/errors.hpp"
#include "critpt/problems.hpp"
#include "oracles.hpp"

using namespace critpt;

namespace {

Matrix diag(std::initializer_list<double> d) {
  const ParamVector v = make_param(d);
  return v.asDiagonal();
}

Problem quad(std::initializer_list<double> d) { return problems::make_quadratic({diag(d), {}}); }

OuterConfig tight() {
  OuterConfig cfg;
  cfg.inner.relative_residual_tol = 1e-12;
  cfg.grad_norm_sq_tol = 1e-20;
  return cfg;
}

}  // namespace

TEST(NewtonMr, SaddleQuadraticInOneStep) {
  const OuterResult r = newton_mr(quad({1.0, -1.0}), make_param({1.0, 1.0}), tight());
  EXPECT_EQ(r.termination, OuterTermination::converged);
  ASSERT_EQ(r.trajectory.records.size(), 2u);
  EXPECT_EQ(r.trajectory.records[1].eta, 1.0);
  EXPECT_LE(r.report.theta_final.norm(), 1e-14);
  EXPECT_EQ(r.report.critical_class, CriticalClass::saddle);
  EXPECT_EQ(r.report.morse_index, 1);
}

TEST(NewtonMr, StartingAtACriticalPointTakesNoSteps) {
  const OuterResult r = newton_mr(problems::make_himmelblau(), make_param({3.0, 2.0}), {});
  EXPECT_EQ(r.termination, OuterTermination::converged);
  ASSERT_EQ(r.trajectory.records.size(), 1u);
  EXPECT_EQ(r.trajectory.records[0].iteration, 0);
  EXPECT_EQ(r.report.critical_class, CriticalClass::minimum);
}

TEST(NewtonMr, HimmelblauFromOriginReachesAnOracleCriticalPoint) {
  const OuterResult r = newton_mr(problems::make_himmelblau(), ParamVector::Zero(2), {});
  ASSERT_EQ(r.termination, OuterTermination::converged);
  double best = 1e300;
  int index = -1;
  for (const auto& p : oracle::himmelblau_critical_points()) {
    const double dist = (p.theta - r.report.theta_final).norm();
    if (dist < best) {
      best = dist;
      index = p.morse_index;
    }
  }
  EXPECT_LE(best, 1e-6);
  EXPECT_EQ(r.report.morse_index, index);
}

TEST(NewtonMrProperty, GradientNormNeverIncreases) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  const Problem h = problems::make_himmelblau();
  for (int trial = 0; trial < 50; ++trial) {
    const OuterResult r = newton_mr(h, make_param({u(rng), u(rng)}), {});
    const auto& rec = r.trajectory.records;
    for (std::size_t t = 1; t < rec.size(); ++t) {
      EXPECT_LE(rec[t].grad_norm_sq, rec[t - 1].grad_norm_sq);
      EXPECT_GT(rec[t].eta, 0.0);
      EXPECT_EQ(rec[t].iteration, static_cast<int>(t));
      EXPECT_GE(rec[t].gradient_evals, rec[t - 1].gradient_evals);
      EXPECT_GE(rec[t].hvp_evals, rec[t - 1].hvp_evals);
    }
  }
}

TEST(NewtonMr, IterationCapIsRespected) {
  OuterConfig cfg;
  cfg.max_outer_iterations = 1;
  cfg.grad_norm_sq_tol = 1e-300;
  const OuterResult r = newton_mr(problems::make_himmelblau(), make_param({-0.3, 0.9}), cfg);
  EXPECT_EQ(r.termination, OuterTermination::max_iterations);
  EXPECT_EQ(r.trajectory.records.size(), 2u);
  EXPECT_FALSE(r.report.converged);
}

TEST(NewtonMr, RejectsMismatchedStart) {
  EXPECT_THROW(newton_mr(quad({1.0, 1.0}), make_param({1.0}), {}), DimensionMismatch);
}

TEST(GradientNormDescent, HalvesOnIdentityQuadratic) {
  OuterConfig cfg;
  cfg.baseline_step = 0.25;
  cfg.max_outer_iterations = 2;
  cfg.grad_norm_sq_tol = 1e-300;
  const OuterResult r = gradient_norm_descent(quad({1.0, 1.0}), make_param({1.0, 0.0}), cfg);
  ASSERT_EQ(r.trajectory.records.size(), 3u);
  EXPECT_DOUBLE_EQ(r.trajectory.records[1].theta[0], 0.5);
  EXPECT_DOUBLE_EQ(r.trajectory.records[2].theta[0], 0.25);
  EXPECT_EQ(r.trajectory.records[2].theta[1], 0.0);
}

TEST(GradientNormDescent, DivergenceIsReported) {
  OuterConfig cfg;
  cfg.baseline_step = 10.0;
  try {
    gradient_norm_descent(quad({1.0, 1.0}), make_param({1.0, 0.0}), cfg);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.trajectory().records.size(), 2u);
  }
  const Problem bare("bare", 1, [](const ParamVector& t) { return t[0] * t[0]; },
                     [](const ParamVector& t) -> ParamVector { return 2.0 * t; });
  EXPECT_THROW(gradient_norm_descent(bare, make_param({1.0}), {}), DomainError);
}

TEST(GradientNormDescent, IllConditioningSlowsConvergence) {
  OuterConfig cfg;
  cfg.grad_norm_sq_tol = 1e-12;
  cfg.max_outer_iterations = 100000;
  std::vector<std::size_t> steps;
  for (double kappa : {2.0, 4.0}) {
    cfg.baseline_step = 1.0 / (2.0 * kappa * kappa);
    steps.push_back(gradient_norm_descent(quad({kappa, 1.0}), make_param({1.0, 1.0}), cfg)
                        .trajectory.records.size());
  }
  EXPECT_GT(steps[1], 3 * steps[0]);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(quad({1.0, 1.0}), ParamVector::Zero(2)).critical_class, CriticalClass::minimum);
  EXPECT_EQ(classify(quad({-1.0, -2.0}), ParamVector::Zero(2)).critical_class, CriticalClass::maximum);
  const CriticalPointReport s = classify(quad({1.0, -1.0}), ParamVector::Zero(2));
  EXPECT_EQ(s.critical_class, CriticalClass::saddle);
  EXPECT_EQ(s.morse_index, 1);
  const CriticalPointReport d = classify(quad({1.0, 0.0}), ParamVector::Zero(2));
  EXPECT_EQ(d.critical_class, CriticalClass::degenerate);
  EXPECT_EQ(d.num_zero, 1);
  EXPECT_DOUBLE_EQ(d.eps_lambda, 1e-6);
  // explicit threshold turns a small eigenvalue into a zero one
  EXPECT_EQ(classify(quad({1.0, 1e-3}), ParamVector::Zero(2), 1e-2).critical_class,
            CriticalClass::degenerate);
}

TEST(ClassifyProperty, BucketsPartitionTheSpectrum) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 8;
    const Matrix a = oracle::random_symmetric(n, rng);
    const CriticalPointReport r = classify(problems::make_quadratic({a, {}}), oracle::random_vector(n, rng));
    EXPECT_EQ(r.morse_index + r.num_zero + r.num_positive, n);
    ASSERT_EQ(static_cast<int>(r.spectrum.size()), n);
    EXPECT_TRUE(std::is_sorted(r.spectrum.begin(), r.spectrum.end()));
    if (r.morse_index == 0 && r.num_zero == 0) EXPECT_EQ(r.critical_class, CriticalClass::minimum);
    if (r.num_positive == 0 && r.num_zero == 0) EXPECT_EQ(r.critical_class, CriticalClass::maximum);
  }
}

TEST(CriticalClass, NamesRoundTrip) {
  for (CriticalClass c : {CriticalClass::minimum, CriticalClass::maximum, CriticalClass::saddle,
                          CriticalClass::degenerate, CriticalClass::unclassified}) {
    EXPECT_EQ(critical_class_from_string(to_string(c)), c);
  }
}

TEST(Sampler, SeededAndWithinBounds) {
  const SamplerSpec spec{{-2.0, 0.0}, {2.0, 0.5}, 123};
  const auto a = sample_starts(spec, 2, 50);
  const auto b = sample_starts(spec, 2, 50);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_GE(a[i][0], -2.0);
    EXPECT_LE(a[i][0], 2.0);
    EXPECT_GE(a[i][1], 0.0);
    EXPECT_LE(a[i][1], 0.5);
  }
  // a prefix of a longer draw is the shorter draw
  const auto c = sample_starts(spec, 2, 10);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(a[i], c[i]);
}

TEST(MultiStart, SingleStartAndQuadraticCluster) {
  MultiStartConfig cfg;
  cfg.count = 1;
  const MultiStartResult one = multi_start(quad({2.0, 3.0}), cfg);
  ASSERT_EQ(one.runs.size(), 1u);
  EXPECT_EQ(one.clusters.size(), 1u);

  cfg.count = 20;
  const MultiStartResult many = multi_start(quad({2.0, -3.0}), cfg);
  ASSERT_EQ(many.clusters.size(), 1u);
  EXPECT_EQ(many.clusters[0].hits(), 20u);
  EXPECT_TRUE(many.non_converged.empty());
  EXPECT_EQ(many.clusters[0].representative.critical_class, CriticalClass::saddle);
}

TEST(MultiStart, ThreadCountDoesNotChangeResults) {
  MultiStartConfig cfg;
  cfg.count = 64;
  cfg.sampler = {{-6.0}, {6.0}, 9};
  const Problem h = problems::make_himmelblau();
  const MultiStartResult serial = multi_start(h, cfg);
  cfg.threads = 4;
  const MultiStartResult parallel = multi_start(h, cfg);
  ASSERT_EQ(serial.runs.size(), parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    EXPECT_EQ(serial.runs[i].result.report.theta_final, parallel.runs[i].result.report.theta_final);
    EXPECT_EQ(serial.runs[i].result.trajectory.records.size(),
              parallel.runs[i].result.trajectory.records.size());
  }
  ASSERT_EQ(serial.clusters.size(), parallel.clusters.size());
  for (std::size_t k = 0; k < serial.clusters.size(); ++k) {
    EXPECT_EQ(serial.clusters[k].members, parallel.clusters[k].members);
  }
}

TEST(MultiStartProperty, ClustersPartitionConvergedRuns) {
  MultiStartConfig cfg;
  cfg.count = 100;
  cfg.sampler = {{-6.0}, {6.0}, 4};
  const MultiStartResult r = multi_start(problems::make_himmelblau(), cfg);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& c : r.clusters) {
    total += c.hits();
    for (std::size_t m : c.members) {
      EXPECT_TRUE(seen.insert(m).second);
      const ParamVector& end = r.runs[m].result.report.theta_final;
      EXPECT_LE((end - c.representative.theta_final).norm(),
                1e-4 * (1.0 + c.representative.theta_final.norm()));
    }
  }
  EXPECT_EQ(total + r.non_converged.size(), r.runs.size());
}
