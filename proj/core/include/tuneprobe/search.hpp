#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "tuneprobe/solver.hpp"
#include "tuneprobe/stimulus.hpp"
#include "tuneprobe/targets.hpp"

namespace tuneprobe {

enum class PathKind { Invariance, Selectivity };

std::string_view to_string(PathKind kind);
PathKind path_kind_from_string(std::string_view s);

/// {0.1 pi, 0.2 pi, 0.3 pi, 0.4 pi, 0.5 pi}
std::vector<double> default_deltas();

struct SearchConfig {
  /// Template for every solver run; max_evaluations, initial_step and seed
  /// are overwritten per run from the fields below.
  SolverConfig solver;
  std::uint64_t seed = 1;
  double energy = 1.0;

  double optimum_budget_factor = 100.0;      // x N per optimal-stimulus run
  double path_budget_factor = 20.0;          // x N per delta
  double reconstruct_budget_factor = 100.0;  // x N per reconstruction run
  double optimum_initial_step = 0.3;
  double path_initial_step = 0.1;

  int optimum_runs = 2;
  int init_candidates = 1000;
  std::vector<double> alpha_set = default_alpha_set();
  std::vector<double> deltas = default_deltas();
  /// Permit cone angles in (pi/2, pi].
  bool full_range = false;

  std::int64_t budget(double factor, std::size_t dimension) const;
  void validate() const;
};

struct OptimumRun {
  Stimulus best;
  double fitness = 0.0;
  SearchTrace trace;
  InitDraw init;
  std::uint64_t seed = 0;
};

struct OptimalStimulusResult {
  Stimulus x_hat;
  double fitness_at_optimum = 0.0;
  /// Trace of the winning run.
  SearchTrace trace;
  InitDraw init_source;
  std::vector<OptimumRun> runs;
};

struct PathResult {
  PathKind kind = PathKind::Invariance;
  std::vector<double> deltas;
  std::vector<Stimulus> points;
  std::vector<double> fitnesses;
  std::vector<SearchTrace> traces;
  int run_index = 0;
};

struct SubspaceSample {
  PathKind kind = PathKind::Invariance;
  double delta = 0.0;
  std::vector<Stimulus> columns;
  std::vector<double> fitnesses;
};

struct ReconstructionSet {
  Stimulus reference;
  ResponseVector reference_response;
  std::vector<Stimulus> reconstructions;
  std::vector<double> fitnesses;
};

struct WalkSample {
  double delta = 0.0;
  double fitness = 0.0;
  int walk = 0;
};

/// Objective a search uses for `target` around `anchor`: the raw response
/// for single-unit targets, exp(-|f(x) - f(anchor)|) for populations.
TargetHandle path_objective_target(const TargetHandle& target, const Stimulus& anchor);

/// Best of config.optimum_runs (seeded initialization + maximize) on an R = 1
/// target. Each run gets the full optimum budget.
OptimalStimulusResult optimal_stimulus(const TargetHandle& target, const SearchConfig& config);

PathResult invariance_path(const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                           int run_index = 0);
PathResult selectivity_path(const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                            int run_index = 0);
PathResult path_search(PathKind kind, const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                       int run_index = 0);

/// n independent cone searches at one delta from random starting directions.
SubspaceSample subspace_sample(const TargetHandle& target, const Stimulus& x_hat, PathKind kind, double delta,
                               int n, const SearchConfig& config);

/// n unconstrained (sphere-only) searches for stimuli reproducing f(x_star).
ReconstructionSet reconstruct(const TargetHandle& target, const Stimulus& x_star, int n, const SearchConfig& config);

/// Fitness along great circles leaving x_hat in random orthogonal directions.
std::vector<WalkSample> random_walk_curve(const TargetHandle& target, const Stimulus& x_hat,
                                          const std::vector<double>& deltas, int n_walks, Rng& rng);

struct ConstraintAudit {
  std::size_t checked = 0;
  std::size_t sphere_violations = 0;
  std::size_t cone_violations = 0;
  double max_sphere_residual = 0.0;  // |(|x| - E)| / E
  double max_cone_residual = 0.0;    // |angle(x, x_hat) - delta|

  void check_sphere(const Stimulus& x, double energy, double tolerance = 1e-9);
  void check_cone(const Stimulus& x, const Stimulus& x_hat, double delta, double tolerance = 1e-6);
  void check(const PathResult& path, const Stimulus& x_hat, double energy);
  void check(const SubspaceSample& sample, const Stimulus& x_hat, double energy);
  void merge(const ConstraintAudit& other);
  bool clean() const { return sphere_violations == 0 && cone_violations == 0; }
};

}  // namespace tuneprobe
