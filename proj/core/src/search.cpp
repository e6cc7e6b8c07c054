#include "tuneprobe/search.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tuneprobe/error.hpp"
#include "tuneprobe/seeding.hpp"

namespace tuneprobe {

std::string_view to_string(PathKind kind) {
  return kind == PathKind::Invariance ? "invariance" : "selectivity";
}

PathKind path_kind_from_string(std::string_view s) {
  if (s == "invariance") return PathKind::Invariance;
  if (s == "selectivity") return PathKind::Selectivity;
  fail(ErrorKind::Config, "unknown path kind '" + std::string(s) + "'");
}

std::vector<double> default_deltas() {
  std::vector<double> d;
  for (int k = 1; k <= 5; ++k) d.push_back(0.1 * k * std::numbers::pi);
  return d;
}

std::int64_t SearchConfig::budget(double factor, std::size_t dimension) const {
  return static_cast<std::int64_t>(std::llround(factor * static_cast<double>(dimension)));
}

void SearchConfig::validate() const {
  if (!(energy > 0.0)) fail(ErrorKind::Config, "energy must be positive");
  if (optimum_runs < 1) fail(ErrorKind::Config, "optimum_runs must be positive");
  if (init_candidates < 1) fail(ErrorKind::Config, "init_candidates must be positive");
  if (alpha_set.empty()) fail(ErrorKind::Config, "alpha_set must be non-empty");
  if (deltas.empty()) fail(ErrorKind::Config, "deltas must be non-empty");
  const double cap = full_range ? std::numbers::pi : 0.5 * std::numbers::pi;
  double previous = 0.0;
  for (double d : deltas) {
    if (!(d > previous) || d > cap + 1e-12) {
      fail(ErrorKind::Config, "deltas must be strictly increasing within (0, " + std::to_string(cap) + "]");
    }
    previous = d;
  }
}

namespace {

Objective scalar_objective(const TargetHandle& target) {
  if (target.response_dim() != 1) fail(ErrorKind::InvalidArgument, "search objective must be a single-response target");
  auto fn = target.function();
  return [fn](std::span<const double> x) {
    double r = 0.0;
    fn->respond(x, std::span<double>(&r, 1));
    return r;
  };
}

Projection cone_projection(const Stimulus& anchor, double delta) {
  auto projector = std::make_shared<const ConeProjector>(anchor, delta);
  return [projector](std::span<const double> raw, std::span<double> out) { projector->apply(raw, out); };
}

SolverConfig run_config(const SearchConfig& config, double factor, double step, std::size_t n, std::uint64_t seed) {
  SolverConfig s = config.solver;
  s.max_evaluations = config.budget(factor, n);
  s.initial_step = step;
  s.seed = seed;
  return s;
}

void check_anchor(const TargetHandle& target, const Stimulus& x_hat) {
  if (x_hat.shape() != target.input_shape()) {
    fail(ErrorKind::ShapeMismatch, "anchor shape " + to_string(x_hat.shape()) + " does not match target " +
                                       to_string(target.input_shape()));
  }
}

Stimulus start_on_cone(const Stimulus& from, const Stimulus& x_hat, double delta, Rng& rng) {
  try {
    return project_cone(from, x_hat, delta);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateDirection) throw;
    return cone_point(x_hat, random_orthogonal_unit(x_hat, rng), delta);
  }
}

}  // namespace

TargetHandle path_objective_target(const TargetHandle& target, const Stimulus& anchor) {
  if (target.response_dim() == 1) return target;
  return match_fitness(target, target.evaluate(anchor));
}

OptimalStimulusResult optimal_stimulus(const TargetHandle& target, const SearchConfig& config) {
  config.validate();
  const Objective objective = scalar_objective(target);
  const Shape shape = target.input_shape();
  const Projection projection = sphere_projection(config.energy);
  OptimalStimulusResult result;
  for (int r = 0; r < config.optimum_runs; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, "optimum", static_cast<std::uint64_t>(r));
    Rng rng(seed);
    InitDraw init = seeded_init(objective, shape, config.energy, config.init_candidates, config.alpha_set, rng);
    const auto solver = run_config(config, config.optimum_budget_factor, config.optimum_initial_step, shape.size(),
                                   derive_seed(seed, "solver"));
    SolverResult run = maximize(objective, projection, init.stimulus, solver);
    result.runs.push_back({std::move(run.best), run.best_fitness, std::move(run.trace), std::move(init), seed});
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < result.runs.size(); ++r) {
    if (result.runs[r].fitness > result.runs[best].fitness) best = r;
  }
  result.x_hat = result.runs[best].best;
  result.fitness_at_optimum = result.runs[best].fitness;
  result.trace = result.runs[best].trace;
  result.init_source = result.runs[best].init;
  return result;
}

PathResult path_search(PathKind kind, const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                       int run_index) {
  config.validate();
  check_anchor(target, x_hat);
  const TargetHandle scored = path_objective_target(target, x_hat);
  const Objective objective = scalar_objective(scored);
  const std::string job = std::string(to_string(kind)) + "/" + std::to_string(run_index);
  Rng rng(derive_seed(config.seed, job + "/start"));

  PathResult path;
  path.kind = kind;
  path.run_index = run_index;
  path.deltas = config.deltas;
  Stimulus previous = x_hat;
  for (std::size_t k = 0; k < config.deltas.size(); ++k) {
    const double delta = config.deltas[k];
    const Stimulus start = start_on_cone(previous, x_hat, delta, rng);
    const auto solver = run_config(config, config.path_budget_factor, config.path_initial_step, x_hat.size(),
                                   derive_seed(config.seed, job, k));
    const Projection projection = cone_projection(x_hat, delta);
    SolverResult run = kind == PathKind::Invariance ? maximize(objective, projection, start, solver)
                                                    : minimize(objective, projection, start, solver);
    previous = run.best;
    path.points.push_back(std::move(run.best));
    path.fitnesses.push_back(run.best_fitness);
    path.traces.push_back(std::move(run.trace));
  }
  return path;
}

PathResult invariance_path(const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                           int run_index) {
  return path_search(PathKind::Invariance, target, x_hat, config, run_index);
}

PathResult selectivity_path(const TargetHandle& target, const Stimulus& x_hat, const SearchConfig& config,
                            int run_index) {
  return path_search(PathKind::Selectivity, target, x_hat, config, run_index);
}

SubspaceSample subspace_sample(const TargetHandle& target, const Stimulus& x_hat, PathKind kind, double delta, int n,
                               const SearchConfig& config) {
  config.validate();
  check_anchor(target, x_hat);
  if (n < 1) fail(ErrorKind::InvalidArgument, "subspace sample needs at least one run");
  const TargetHandle scored = path_objective_target(target, x_hat);
  const Objective objective = scalar_objective(scored);
  const Projection projection = cone_projection(x_hat, delta);
  SubspaceSample sample;
  sample.kind = kind;
  sample.delta = delta;
  const std::string job = "subspace/" + std::string(to_string(kind));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = derive_seed(config.seed, job, static_cast<std::uint64_t>(i));
    Rng rng(seed);
    const Stimulus start = cone_point(x_hat, random_orthogonal_unit(x_hat, rng), delta);
    const auto solver =
        run_config(config, config.path_budget_factor, config.path_initial_step, x_hat.size(), derive_seed(seed, "solver"));
    SolverResult run = kind == PathKind::Invariance ? maximize(objective, projection, start, solver)
                                                    : minimize(objective, projection, start, solver);
    sample.columns.push_back(std::move(run.best));
    sample.fitnesses.push_back(run.best_fitness);
  }
  return sample;
}

ReconstructionSet reconstruct(const TargetHandle& target, const Stimulus& x_star, int n, const SearchConfig& config) {
  config.validate();
  check_anchor(target, x_star);
  if (n < 1) fail(ErrorKind::InvalidArgument, "reconstruction needs at least one run");
  ReconstructionSet set;
  set.reference = x_star;
  set.reference_response = target.evaluate(x_star);
  const Objective objective = scalar_objective(match_fitness(target, set.reference_response));
  const double energy = x_star.energy();
  const Projection projection = sphere_projection(energy);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = derive_seed(config.seed, "reconstruct", static_cast<std::uint64_t>(i));
    Rng rng(seed);
    InitDraw init = seeded_init(objective, x_star.shape(), energy, config.init_candidates, config.alpha_set, rng);
    const auto solver = run_config(config, config.reconstruct_budget_factor, config.optimum_initial_step, x_star.size(),
                                   derive_seed(seed, "solver"));
    SolverResult run = maximize(objective, projection, init.stimulus, solver);
    set.reconstructions.push_back(std::move(run.best));
    set.fitnesses.push_back(run.best_fitness);
  }
  return set;
}

std::vector<WalkSample> random_walk_curve(const TargetHandle& target, const Stimulus& x_hat,
                                          const std::vector<double>& deltas, int n_walks, Rng& rng) {
  check_anchor(target, x_hat);
  if (n_walks < 1) fail(ErrorKind::InvalidArgument, "random walk needs at least one walk");
  const TargetHandle scored = path_objective_target(target, x_hat);
  std::vector<WalkSample> out;
  for (int w = 0; w < n_walks; ++w) {
    const Stimulus direction = random_orthogonal_unit(x_hat, rng);
    for (double delta : deltas) {
      const Stimulus point = cone_point(x_hat, direction, delta);
      out.push_back({delta, scored.scalar(point.values()), w});
    }
  }
  return out;
}

void ConstraintAudit::check_sphere(const Stimulus& x, double energy, double tolerance) {
  ++checked;
  const double residual = std::abs(x.energy() - energy) / energy;
  max_sphere_residual = std::max(max_sphere_residual, residual);
  if (residual > tolerance) ++sphere_violations;
}

void ConstraintAudit::check_cone(const Stimulus& x, const Stimulus& x_hat, double delta, double tolerance) {
  const double residual = std::abs(angular_distance(x, x_hat) - delta);
  max_cone_residual = std::max(max_cone_residual, residual);
  if (residual > tolerance) ++cone_violations;
}

void ConstraintAudit::check(const PathResult& path, const Stimulus& x_hat, double energy) {
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    check_sphere(path.points[k], energy);
    check_cone(path.points[k], x_hat, path.deltas[k]);
  }
}

void ConstraintAudit::check(const SubspaceSample& sample, const Stimulus& x_hat, double energy) {
  for (const auto& c : sample.columns) {
    check_sphere(c, energy);
    check_cone(c, x_hat, sample.delta);
  }
}

void ConstraintAudit::merge(const ConstraintAudit& other) {
  checked += other.checked;
  sphere_violations += other.sphere_violations;
  cone_violations += other.cone_violations;
  max_sphere_residual = std::max(max_sphere_residual, other.max_sphere_residual);
  max_cone_residual = std::max(max_cone_residual, other.max_cone_residual);
}

}  // namespace tuneprobe
