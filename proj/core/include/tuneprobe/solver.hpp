#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "tuneprobe/stimulus.hpp"

namespace tuneprobe {

/// Fitness of a point that already satisfies the search constraints.
using Objective = std::function<double(std::span<const double>)>;

/// Maps a raw solver coordinate onto the constraint manifold. The solver
/// itself is unconstrained; every candidate passes through this before the
/// objective sees it.
using Projection = std::function<void(std::span<const double> raw, std::span<double> out)>;

struct SolverConfig {
  /// Defaults to 4 + floor(3 ln N) when unset.
  std::optional<int> population_size;
  /// Initial step length as a fraction of the sphere radius E. The
  /// per-coordinate standard deviation is initial_step * E / sqrt(N).
  double initial_step = 0.3;
  std::int64_t max_evaluations = 1000;
  /// Relative step size (sigma * sqrt(max C_ii) / |mean|) below which the run stops.
  double step_tolerance = 1e-8;
  /// Generations without strict improvement of the best fitness before stopping.
  int stagnation_window = 20;
  std::uint64_t seed = 1;
  /// Each fitness value is the mean of this many objective calls.
  int repeat_evaluations = 1;

  int lambda_for(std::size_t dimension) const;
  void validate(std::size_t dimension) const;
};

enum class Termination { Budget, StepTolerance, Stagnation, NonFiniteObjective };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct TracePoint {
  std::int64_t evaluations = 0;
  double fitness = 0.0;
};

struct TraceSnapshot {
  std::int64_t evaluations = 0;
  double fitness = 0.0;
  std::vector<double> point;
};

/// History of one solver run. Fitness values are reported in the caller's
/// sense: non-decreasing for maximize, non-increasing for minimize.
struct SearchTrace {
  std::vector<TracePoint> best_fitness_history;
  std::vector<TraceSnapshot> best_point_history;
  Termination termination = Termination::Budget;
  std::int64_t evaluations = 0;
  int generations = 0;
  bool minimized = false;
};

struct SolverResult {
  Stimulus best;
  double best_fitness = 0.0;
  SearchTrace trace;
};

/// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
/// cumulative step-size adaptation. x0 must already satisfy the constraints;
/// it is evaluated once and seeds the best-so-far. Throws
/// Error(NonFiniteObjective) if the objective ever returns NaN or infinity;
/// use maximize_traced to keep the partial trace in that case.
SolverResult maximize(const Objective& objective, const Projection& projection, const Stimulus& x0,
                      const SolverConfig& config);
SolverResult minimize(const Objective& objective, const Projection& projection, const Stimulus& x0,
                      const SolverConfig& config);

/// Non-throwing form: on a non-finite objective value the returned trace ends
/// with Termination::NonFiniteObjective and the best point found so far.
SolverResult maximize_traced(const Objective& objective, const Projection& projection, const Stimulus& x0,
                             const SolverConfig& config);
SolverResult minimize_traced(const Objective& objective, const Projection& projection, const Stimulus& x0,
                             const SolverConfig& config);

/// Sphere projection of radius `energy`, the projection for unconstrained
/// (energy-only) searches.
Projection sphere_projection(double energy);

struct InitDraw {
  Stimulus stimulus;
  double fitness = 0.0;
  int index = 0;
  double alpha = 0.0;
  int evaluations = 0;
};

/// Best of n_candidates pink-noise stimuli, cycling through alpha_set. These
/// evaluations are reported here and not charged to any solver budget.
InitDraw seeded_init(const Objective& objective, Shape shape, double energy, int n_candidates,
                     std::span<const double> alpha_set, Rng& rng);

/// The literal exponent set {-4, -3, -2, -1, 0}.
std::vector<double> default_alpha_set();

}  // namespace tuneprobe
