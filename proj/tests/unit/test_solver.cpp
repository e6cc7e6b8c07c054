#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>

#include "fixtures.hpp"
#include "tuneprobe/error.hpp"
#include "tuneprobe/solver.hpp"

namespace tuneprobe {
namespace {

using testing::basis_vector;
using testing::random_stimulus;

Objective linear_objective(const Stimulus& w) {
  return [w](std::span<const double> x) { return dot(w.values(), x); };
}

Objective quadratic_objective(const Eigen::MatrixXd& q) {
  return [q](std::span<const double> x) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return 0.5 * v.dot(q * v);
  };
}

SolverConfig budget_config(std::size_t n, double factor, std::uint64_t seed) {
  SolverConfig c;
  c.max_evaluations = static_cast<std::int64_t>(factor * static_cast<double>(n));
  c.seed = seed;
  return c;
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  const auto g = testing::gaussian_vector(static_cast<std::size_t>(n * n), seed);
  Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(g.data(), n, n);
  return (a + a.transpose()) / 2.0;
}

TEST(SolverConfig, DefaultPopulationSize) {
  SolverConfig c;
  EXPECT_EQ(c.lambda_for(16), 4 + static_cast<int>(std::floor(3.0 * std::log(16.0))));
  EXPECT_EQ(c.lambda_for(121), 18);
  c.population_size = 1;
  EXPECT_THROW(c.validate(16), Error);
}

TEST(Maximize, LinearOnSphereFindsWeight) {
  const Shape shape{4, 4};
  const Stimulus w = basis_vector(shape, 0);
  const Stimulus x0 = random_stimulus(shape, 2);
  const auto r = maximize(linear_objective(w), sphere_projection(1.0), x0, budget_config(16, 100, 1));
  EXPECT_GE(testing::cosine(r.best, w), 0.99);
  EXPECT_NEAR(r.best.energy(), 1.0, 1e-9);
}

TEST(Maximize, ConstantObjectiveStagnatesAtStart) {
  const Stimulus x0 = random_stimulus({3, 3}, 4);
  const auto r = maximize([](std::span<const double>) { return 2.0; }, sphere_projection(1.0), x0,
                          budget_config(9, 1000, 1));
  EXPECT_EQ(r.trace.termination, Termination::Stagnation);
  EXPECT_EQ(r.best_fitness, 2.0);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(r.best[i], x0[i], 1e-12);
}

TEST(Maximize, QuadraticTopEigenvector) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(8, 8);
  q(0, 0) = 5.0;
  const auto r = maximize(quadratic_objective(q), sphere_projection(1.0), random_stimulus({2, 4}, 3),
                          budget_config(8, 200, 2));
  EXPECT_GE(std::abs(r.best[0]), 0.99);
}

TEST(Minimize, LinearFindsNegativeWeight) {
  const Shape shape{4, 4};
  const Stimulus w = random_stimulus(shape, 8);
  const auto r = minimize(linear_objective(w), sphere_projection(1.0), random_stimulus(shape, 9),
                          budget_config(16, 100, 3));
  EXPECT_LE(testing::cosine(r.best, w), -0.99);
  EXPECT_TRUE(r.trace.minimized);
}

TEST(Minimize, QuadraticBottomEigenvector) {
  const Eigen::MatrixXd q = random_symmetric(8, 10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  const Eigen::VectorXd bottom = eig.eigenvectors().col(0);
  ASSERT_GT(eig.eigenvalues()(1) - eig.eigenvalues()(0), 0.1);
  const auto r = minimize(quadratic_objective(q), sphere_projection(1.0), random_stimulus({2, 4}, 11),
                          budget_config(8, 300, 4));
  const Eigen::Map<const Eigen::VectorXd> best(r.best.values().data(), 8);
  EXPECT_GE(std::abs(best.dot(bottom)), 0.99);
}

TEST(Minimize, ConstantObjectiveStagnates) {
  const auto r = minimize([](std::span<const double>) { return -1.0; }, sphere_projection(1.0),
                          random_stimulus({3, 3}, 1), budget_config(9, 1000, 1));
  EXPECT_EQ(r.trace.termination, Termination::Stagnation);
}

TEST(Solver, BudgetIsExactlyAccounted) {
  const Stimulus w = random_stimulus({5, 5}, 1);
  std::atomic<std::int64_t> calls{0};
  const Objective f = [&](std::span<const double> x) {
    ++calls;
    return dot(w.values(), x);
  };
  SolverConfig c = budget_config(25, 30, 5);
  c.stagnation_window = 1000000;
  c.step_tolerance = 1e-300;
  const auto r = maximize(f, sphere_projection(1.0), random_stimulus({5, 5}, 2), c);
  EXPECT_EQ(r.trace.evaluations, calls.load());
  EXPECT_LE(r.trace.evaluations, c.max_evaluations);
  EXPECT_EQ(r.trace.termination, Termination::Budget);
}

TEST(Solver, RepeatedEvaluationsCountAgainstBudget) {
  const Stimulus w = random_stimulus({3, 3}, 1);
  std::int64_t calls = 0;
  SolverConfig c = budget_config(9, 50, 5);
  c.repeat_evaluations = 3;
  const auto r = maximize(
      [&](std::span<const double> x) {
        ++calls;
        return dot(w.values(), x);
      },
      sphere_projection(1.0), random_stimulus({3, 3}, 2), c);
  EXPECT_EQ(r.trace.evaluations, calls);
  EXPECT_EQ(calls % 3, 0);
  EXPECT_LE(calls, c.max_evaluations);
}

TEST(Solver, DeterministicTrace) {
  const Stimulus w = random_stimulus({4, 4}, 3);
  const Stimulus x0 = random_stimulus({4, 4}, 4);
  const auto a = maximize(linear_objective(w), sphere_projection(1.0), x0, budget_config(16, 50, 77));
  const auto b = maximize(linear_objective(w), sphere_projection(1.0), x0, budget_config(16, 50, 77));
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.trace.best_fitness_history.size(), b.trace.best_fitness_history.size());
  for (std::size_t i = 0; i < a.trace.best_fitness_history.size(); ++i) {
    EXPECT_EQ(a.trace.best_fitness_history[i].fitness, b.trace.best_fitness_history[i].fitness);
    EXPECT_EQ(a.trace.best_fitness_history[i].evaluations, b.trace.best_fitness_history[i].evaluations);
  }
}

TEST(Solver, BestSoFarIsMonotone) {
  const Eigen::MatrixXd q = random_symmetric(9, 3);
  const auto up = maximize(quadratic_objective(q), sphere_projection(1.0), random_stimulus({3, 3}, 1),
                           budget_config(9, 100, 1));
  for (std::size_t i = 1; i < up.trace.best_fitness_history.size(); ++i) {
    EXPECT_GE(up.trace.best_fitness_history[i].fitness, up.trace.best_fitness_history[i - 1].fitness);
  }
  const auto down = minimize(quadratic_objective(q), sphere_projection(1.0), random_stimulus({3, 3}, 1),
                             budget_config(9, 100, 1));
  for (std::size_t i = 1; i < down.trace.best_fitness_history.size(); ++i) {
    EXPECT_LE(down.trace.best_fitness_history[i].fitness, down.trace.best_fitness_history[i - 1].fitness);
  }
}

TEST(Solver, NonFiniteObjective) {
  int calls = 0;
  const Objective f = [&](std::span<const double> x) { return ++calls > 10 ? NAN : x[0]; };
  try {
    maximize(f, sphere_projection(1.0), random_stimulus({3, 3}, 1), budget_config(9, 100, 1));
    FAIL() << "expected NonFiniteObjective";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteObjective);
  }
  calls = 0;
  const auto r = maximize_traced(f, sphere_projection(1.0), random_stimulus({3, 3}, 1), budget_config(9, 100, 1));
  EXPECT_EQ(r.trace.termination, Termination::NonFiniteObjective);
  EXPECT_FALSE(r.trace.best_fitness_history.empty());
  EXPECT_TRUE(std::isfinite(r.best_fitness));
}

TEST(SeededInit, SingleCandidateIsReturned) {
  const auto alphas = default_alpha_set();
  Rng a(3), b(3);
  const InitDraw d = seeded_init([](std::span<const double> x) { return x[0]; }, {4, 4}, 1.0, 1, alphas, a);
  EXPECT_EQ(d.stimulus, sample_pink_noise({4, 4}, alphas[0], 1.0, b));
  EXPECT_EQ(d.index, 0);
  EXPECT_EQ(d.evaluations, 1);
}

TEST(SeededInit, ReturnsMaximumOfAllCandidates) {
  const Stimulus e1 = basis_vector({5, 5}, 0);
  const auto alphas = default_alpha_set();
  std::vector<double> seen;
  const Objective f = [&](std::span<const double> x) {
    seen.push_back(dot(e1.values(), x));
    return seen.back();
  };
  Rng rng(12);
  const InitDraw d = seeded_init(f, {5, 5}, 1.0, 1000, alphas, rng);
  ASSERT_EQ(seen.size(), 1000u);
  for (double v : seen) EXPECT_GE(d.fitness, v);
  EXPECT_EQ(d.fitness, seen[static_cast<std::size_t>(d.index)]);
}

TEST(SeededInit, Deterministic) {
  const Objective f = [](std::span<const double> x) { return x[3] - x[1]; };
  Rng a(5), b(5);
  const auto alphas = default_alpha_set();
  EXPECT_EQ(seeded_init(f, {4, 4}, 1.0, 100, alphas, a).stimulus, seeded_init(f, {4, 4}, 1.0, 100, alphas, b).stimulus);
}

TEST(Termination, StringRoundTrip) {
  for (auto t : {Termination::Budget, Termination::StepTolerance, Termination::Stagnation,
                 Termination::NonFiniteObjective}) {
    EXPECT_EQ(termination_from_string(to_string(t)), t);
  }
}

}  // namespace
}  // namespace tuneprobe
