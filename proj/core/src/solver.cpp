#include "tuneprobe/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tuneprobe/error.hpp"

namespace tuneprobe {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Budget: return "budget";
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::Stagnation: return "stagnation";
    case Termination::NonFiniteObjective: return "non_finite_objective";
  }
  return "budget";
}

Termination termination_from_string(std::string_view s) {
  if (s == "budget") return Termination::Budget;
  if (s == "step_tolerance") return Termination::StepTolerance;
  if (s == "stagnation") return Termination::Stagnation;
  if (s == "non_finite_objective") return Termination::NonFiniteObjective;
  fail(ErrorKind::Config, "unknown termination reason '" + std::string(s) + "'");
}

int SolverConfig::lambda_for(std::size_t dimension) const {
  if (population_size) return *population_size;
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

void SolverConfig::validate(std::size_t dimension) const {
  const int lambda = lambda_for(dimension);
  if (lambda < 2) fail(ErrorKind::Config, "population size must be at least 2");
  if (max_evaluations < lambda) fail(ErrorKind::Config, "max_evaluations must be at least the population size");
  if (!(initial_step > 0.0)) fail(ErrorKind::Config, "initial_step must be positive");
  if (!(step_tolerance > 0.0)) fail(ErrorKind::Config, "step_tolerance must be positive");
  if (stagnation_window < 1) fail(ErrorKind::Config, "stagnation_window must be positive");
  if (repeat_evaluations < 1) fail(ErrorKind::Config, "repeat_evaluations must be positive");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Strategy {
  int n = 0;
  int lambda = 0;
  int mu = 0;
  VectorXd weights;
  double mueff = 0.0;
  double cc = 0.0;
  double cs = 0.0;
  double c1 = 0.0;
  double cmu = 0.0;
  double damps = 0.0;
  double chi_n = 0.0;

  Strategy(int dimension, int population) : n(dimension), lambda(population), mu(population / 2) {
    weights.resize(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    weights /= weights.sum();
    mueff = 1.0 / weights.squaredNorm();
    const double nd = n;
    cc = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
    cs = (mueff + 2.0) / (nd + mueff + 5.0);
    c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
    cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nd + 2.0) * (nd + 2.0) + mueff));
    damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) + cs;
    chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  }
};

class Run {
 public:
  Run(const Objective& objective, const Projection& projection, const Stimulus& x0, const SolverConfig& config,
      double sign)
      : objective_(objective),
        projection_(projection),
        config_(config),
        sign_(sign),
        shape_(x0.shape()),
        strategy_(static_cast<int>(x0.size()), config.lambda_for(x0.size())),
        rng_(config.seed),
        candidate_(x0.size()) {
    config.validate(x0.size());
    const int n = strategy_.n;
    mean_ = Eigen::Map<const VectorXd>(x0.values().data(), n);
    const double radius = x0.energy() > 0.0 ? x0.energy() : 1.0;
    sigma_ = config.initial_step * radius / std::sqrt(static_cast<double>(n));
    cov_ = MatrixXd::Identity(n, n);
    basis_ = MatrixXd::Identity(n, n);
    scales_ = VectorXd::Ones(n);
    inv_sqrt_cov_ = MatrixXd::Identity(n, n);
    path_c_ = VectorXd::Zero(n);
    path_s_ = VectorXd::Zero(n);
    trace_.minimized = sign < 0.0;
  }

  SolverResult execute() {
    const int n = strategy_.n;
    const int lambda = strategy_.lambda;
    const int repeats = config_.repeat_evaluations;

    // Starting point.
    std::vector<double> projected(static_cast<std::size_t>(n));
    projection_(std::span<const double>(mean_.data(), n), projected);
    double f0 = 0.0;
    if (!evaluate(projected, f0)) return finish(Termination::NonFiniteObjective);
    best_ = projected;
    best_fitness_ = f0;
    record_improvement();

    MatrixXd z(n, lambda);
    MatrixXd y(n, lambda);
    std::vector<double> fitness(static_cast<std::size_t>(lambda));
    std::vector<std::vector<double>> points(static_cast<std::size_t>(lambda), std::vector<double>(n));
    std::vector<int> order(static_cast<std::size_t>(lambda));
    std::normal_distribution<double> gauss(0.0, 1.0);
    int since_improvement = 0;
    std::int64_t last_eigen_eval = 0;

    while (evaluations_ + static_cast<std::int64_t>(lambda) * repeats <= config_.max_evaluations) {
      for (int k = 0; k < lambda; ++k) {
        for (int i = 0; i < n; ++i) z(i, k) = gauss(rng_);
      }
      y.noalias() = basis_ * (scales_.asDiagonal() * z);

      for (int k = 0; k < lambda; ++k) {
        for (int i = 0; i < n; ++i) candidate_[i] = mean_[i] + sigma_ * y(i, k);
        try {
          projection_(candidate_, points[k]);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegenerateDirection) throw;
          // Measure-zero draw onto the cone axis: rank it last, no evaluation.
          fitness[k] = -std::numeric_limits<double>::infinity();
          continue;
        }
        if (!evaluate(points[k], fitness[k])) return finish(Termination::NonFiniteObjective);
      }
      ++trace_.generations;

      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fitness[a] > fitness[b]; });

      if (fitness[order[0]] > best_fitness_) {
        best_fitness_ = fitness[order[0]];
        best_ = points[order[0]];
        record_improvement();
        since_improvement = 0;
      } else {
        ++since_improvement;
      }

      update(y, order);

      if (static_cast<double>(evaluations_ - last_eigen_eval) >
          lambda / (strategy_.c1 + strategy_.cmu) / n / 10.0) {
        decompose();
        last_eigen_eval = evaluations_;
      }

      const double max_std = sigma_ * std::sqrt(cov_.diagonal().maxCoeff());
      const double mean_norm = std::max(mean_.norm(), std::numeric_limits<double>::min());
      if (max_std / mean_norm < config_.step_tolerance) return finish(Termination::StepTolerance);
      if (since_improvement >= config_.stagnation_window) return finish(Termination::Stagnation);
    }
    return finish(Termination::Budget);
  }

 private:
  bool evaluate(std::span<const double> point, double& out) {
    double acc = 0.0;
    for (int r = 0; r < config_.repeat_evaluations; ++r) {
      const double v = objective_(point);
      ++evaluations_;
      if (!std::isfinite(v)) return false;
      acc += v;
    }
    out = sign_ * acc / config_.repeat_evaluations;
    return true;
  }

  void update(const MatrixXd& y, const std::vector<int>& order) {
    const Strategy& s = strategy_;
    VectorXd y_w = VectorXd::Zero(s.n);
    MatrixXd selected(s.n, s.mu);
    for (int i = 0; i < s.mu; ++i) {
      selected.col(i) = y.col(order[i]);
      y_w += s.weights[i] * selected.col(i);
    }
    mean_ += sigma_ * y_w;

    path_s_ = (1.0 - s.cs) * path_s_ + std::sqrt(s.cs * (2.0 - s.cs) * s.mueff) * (inv_sqrt_cov_ * y_w);
    const double ps_norm = path_s_.norm();
    const double gen = trace_.generations;
    const bool hsig =
        ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.cs, 2.0 * gen)) / s.chi_n < 1.4 + 2.0 / (s.n + 1.0);
    path_c_ = (1.0 - s.cc) * path_c_ + (hsig ? std::sqrt(s.cc * (2.0 - s.cc) * s.mueff) : 0.0) * y_w;

    const double old_weight = 1.0 - s.c1 - s.cmu + (hsig ? 0.0 : s.c1 * s.cc * (2.0 - s.cc));
    cov_ *= old_weight;
    cov_.noalias() += s.c1 * path_c_ * path_c_.transpose();
    cov_.noalias() += s.cmu * selected * s.weights.asDiagonal() * selected.transpose();

    sigma_ *= std::exp(std::min(1.0, (s.cs / s.damps) * (ps_norm / s.chi_n - 1.0)));
  }

  void decompose() {
    const int n = strategy_.n;
    MatrixXd sym = 0.5 * (cov_ + cov_.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
    VectorXd values = eig.eigenvalues();
    const double floor = 1e-14 * std::max(sym.trace() / n, std::numeric_limits<double>::min());
    bool repaired = false;
    for (int i = 0; i < n; ++i) {
      if (!(values[i] >= floor)) {
        values[i] = floor;
        repaired = true;
      }
    }
    basis_ = eig.eigenvectors();
    scales_ = values.cwiseSqrt();
    if (repaired) {
      cov_ = basis_ * values.asDiagonal() * basis_.transpose();
    } else {
      cov_ = sym;
    }
    inv_sqrt_cov_ = basis_ * scales_.cwiseInverse().asDiagonal() * basis_.transpose();
  }

  void record_improvement() {
    const double reported = sign_ * best_fitness_;
    trace_.best_fitness_history.push_back({evaluations_, reported});
    if (evaluations_ >= next_snapshot_) {
      trace_.best_point_history.push_back({evaluations_, reported, best_});
      next_snapshot_ = std::max<std::int64_t>(1, evaluations_) * 2;
    }
  }

  SolverResult finish(Termination why) {
    trace_.termination = why;
    trace_.evaluations = evaluations_;
    if (best_.empty()) {
      // The very first evaluation was non-finite; report the starting point.
      best_.resize(static_cast<std::size_t>(strategy_.n));
      projection_(std::span<const double>(mean_.data(), strategy_.n), best_);
      best_fitness_ = std::numeric_limits<double>::quiet_NaN();
    }
    const double reported = sign_ * best_fitness_;
    if (trace_.best_point_history.empty() || trace_.best_point_history.back().point != best_) {
      trace_.best_point_history.push_back({evaluations_, reported, best_});
    }
    return SolverResult{Stimulus(shape_, best_), reported, std::move(trace_)};
  }

  const Objective& objective_;
  const Projection& projection_;
  const SolverConfig& config_;
  double sign_;
  Shape shape_;
  Strategy strategy_;
  Rng rng_;

  VectorXd mean_;
  double sigma_ = 0.0;
  MatrixXd cov_;
  MatrixXd basis_;
  VectorXd scales_;
  MatrixXd inv_sqrt_cov_;
  VectorXd path_c_;
  VectorXd path_s_;

  std::vector<double> candidate_;
  std::vector<double> best_;
  double best_fitness_ = -std::numeric_limits<double>::infinity();
  std::int64_t evaluations_ = 0;
  std::int64_t next_snapshot_ = 0;
  SearchTrace trace_;
};

SolverResult run_checked(SolverResult result) {
  if (result.trace.termination == Termination::NonFiniteObjective) {
    fail(ErrorKind::NonFiniteObjective,
         "objective returned a non-finite value after " + std::to_string(result.trace.evaluations) + " evaluations");
  }
  return result;
}

}  // namespace

SolverResult maximize_traced(const Objective& objective, const Projection& projection, const Stimulus& x0,
                             const SolverConfig& config) {
  return Run(objective, projection, x0, config, 1.0).execute();
}

SolverResult minimize_traced(const Objective& objective, const Projection& projection, const Stimulus& x0,
                             const SolverConfig& config) {
  return Run(objective, projection, x0, config, -1.0).execute();
}

SolverResult maximize(const Objective& objective, const Projection& projection, const Stimulus& x0,
                      const SolverConfig& config) {
  return run_checked(maximize_traced(objective, projection, x0, config));
}

SolverResult minimize(const Objective& objective, const Projection& projection, const Stimulus& x0,
                      const SolverConfig& config) {
  return run_checked(minimize_traced(objective, projection, x0, config));
}

Projection sphere_projection(double energy) {
  return [energy](std::span<const double> raw, std::span<double> out) { project_sphere_into(raw, energy, out); };
}

std::vector<double> default_alpha_set() { return {-4.0, -3.0, -2.0, -1.0, 0.0}; }

InitDraw seeded_init(const Objective& objective, Shape shape, double energy, int n_candidates,
                     std::span<const double> alpha_set, Rng& rng) {
  if (n_candidates < 1) fail(ErrorKind::InvalidArgument, "seeded_init needs at least one candidate");
  if (alpha_set.empty()) fail(ErrorKind::InvalidArgument, "seeded_init needs a non-empty alpha set");
  InitDraw best;
  bool have = false;
  for (int i = 0; i < n_candidates; ++i) {
    const double alpha = alpha_set[static_cast<std::size_t>(i) % alpha_set.size()];
    Stimulus candidate = sample_pink_noise(shape, alpha, energy, rng);
    const double f = objective(candidate.values());
    if (!std::isfinite(f)) {
      fail(ErrorKind::NonFiniteObjective, "objective returned a non-finite value during initialization");
    }
    if (!have || f > best.fitness) {
      best.stimulus = std::move(candidate);
      best.fitness = f;
      best.index = i;
      best.alpha = alpha;
      have = true;
    }
  }
  best.evaluations = n_candidates;
  return best;
}

}  // namespace tuneprobe
