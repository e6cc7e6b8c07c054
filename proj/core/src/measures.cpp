#include "tuneprobe/measures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tuneprobe/error.hpp"
#include "tuneprobe/fourier.hpp"

namespace tuneprobe {

double spectral_complexity(const Stimulus& x_hat) {
  if (x_hat.energy() == 0.0) fail(ErrorKind::ZeroVector, "spectral complexity of the zero stimulus");
  if (x_hat.size() < 2) fail(ErrorKind::InvalidArgument, "spectral complexity needs at least two pixels");
  const auto spectrum = dft2(x_hat.values(), x_hat.shape());
  double l1 = 0.0;
  double l2 = 0.0;
  for (const auto& c : spectrum) {
    const double m = std::abs(c);
    l1 += m;
    l2 += m * m;
  }
  const double ratio = l1 / std::sqrt(l2);
  const double root_m = std::sqrt(static_cast<double>(spectrum.size()));
  return std::clamp((ratio - 1.0) / (root_m - 1.0), 0.0, 1.0);
}

double explanation_power(const Stimulus& x_hat, const StimulusSet& task, double top_fraction) {
  if (task.empty()) fail(ErrorKind::EmptySet, "explanation power over an empty task set");
  if (!(top_fraction > 0.0) || top_fraction > 1.0) fail(ErrorKind::InvalidArgument, "top_fraction must be in (0, 1]");
  if (task.shape() != x_hat.shape()) fail(ErrorKind::ShapeMismatch, "task and optimal stimulus shapes differ");
  if (x_hat.energy() == 0.0) fail(ErrorKind::ZeroVector, "optimal stimulus is the zero vector");
  std::vector<double> scores;
  scores.reserve(task.size());
  for (const auto& t : task.items()) {
    if (t.energy() == 0.0) {
      scores.push_back(0.0);
      continue;
    }
    scores.push_back(std::max(dot(t.values(), x_hat.values()) / (t.energy() * x_hat.energy()), 0.0));
  }
  const auto n = static_cast<double>(scores.size());
  const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(top_fraction * n - 1e-9)));
  std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(k), scores.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += scores[i];
  return sum / static_cast<double>(k);
}

SsimParams ssim_params_for(const Stimulus& reference) {
  SsimParams p;
  const auto [lo, hi] = std::minmax_element(reference.values().begin(), reference.values().end());
  p.dynamic_range = *hi - *lo;
  if (!(p.dynamic_range > 0.0)) p.dynamic_range = 1.0;
  return p;
}

double ssim(const Stimulus& a, const Stimulus& b, const SsimParams& params) {
  if (a.shape() != b.shape()) fail(ErrorKind::ShapeMismatch, "SSIM of differently shaped stimuli");
  const int w = params.window;
  if (w < 1 || a.height() < w || a.width() < w) {
    fail(ErrorKind::ShapeMismatch, "SSIM window " + std::to_string(w) + " exceeds image " + to_string(a.shape()));
  }
  if (!(params.dynamic_range > 0.0)) fail(ErrorKind::InvalidArgument, "SSIM dynamic range must be positive");

  std::vector<double> kernel(static_cast<std::size_t>(w) * w);
  const double centre = 0.5 * (w - 1);
  double total = 0.0;
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r2 = (y - centre) * (y - centre) + (x - centre) * (x - centre);
      const double g = std::exp(-r2 / (2.0 * params.sigma * params.sigma));
      kernel[static_cast<std::size_t>(y) * w + x] = g;
      total += g;
    }
  }
  for (double& g : kernel) g /= total;

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  const int rows = a.height() - w + 1;
  const int cols = a.width() - w + 1;
  double sum = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int y = 0; y < w; ++y) {
        for (int x = 0; x < w; ++x) {
          const double g = kernel[static_cast<std::size_t>(y) * w + x];
          const double va = a.at(r + y, c + x);
          const double vb = b.at(r + y, c + x);
          ma += g * va;
          mb += g * vb;
          saa += g * va * va;
          sbb += g * vb * vb;
          sab += g * va * vb;
        }
      }
      const double var_a = saa - ma * ma;
      const double var_b = sbb - mb * mb;
      const double cov = sab - ma * mb;
      sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
  }
  return sum / (static_cast<double>(rows) * cols);
}

double encoding_specificity(const ReconstructionSet& recons, const SsimParams& params) {
  if (recons.reconstructions.empty()) fail(ErrorKind::EmptySet, "no reconstructions");
  double sum = 0.0;
  for (const auto& x : recons.reconstructions) sum += ssim(recons.reference, x, params);
  return sum / static_cast<double>(recons.reconstructions.size());
}

double encoding_specificity(const ReconstructionSet& recons) {
  return encoding_specificity(recons, ssim_params_for(recons.reference));
}

namespace {

double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) area += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
  return area;
}

void check_path(const PathResult& path) {
  if (path.deltas.empty() || path.deltas.size() != path.fitnesses.size()) {
    fail(ErrorKind::InvalidArgument, "path needs one fitness per delta");
  }
}

}  // namespace

double path_potential_unit(const PathResult& path, double f_at_optimum) {
  check_path(path);
  if (!(f_at_optimum > 0.0)) fail(ErrorKind::NonPositiveOptimum, "path potential needs a positive optimum response");
  std::vector<double> xs{0.0};
  std::vector<double> ys{0.0};
  for (std::size_t k = 0; k < path.deltas.size(); ++k) {
    const double normalized = std::clamp(path.fitnesses[k] / f_at_optimum, -1.0, 1.0);
    xs.push_back(path.deltas[k]);
    ys.push_back(std::abs(std::acos(normalized) - path.deltas[k]));
  }
  const double span = xs.back();
  return std::clamp(trapezoid(xs, ys) / (0.5 * span * span), 0.0, 1.0);
}

double path_potential_population(const PathResult& path) {
  check_path(path);
  std::vector<double> xs{0.0};
  std::vector<double> ys{1.0};
  for (std::size_t k = 0; k < path.deltas.size(); ++k) {
    xs.push_back(path.deltas[k]);
    ys.push_back(path.fitnesses[k]);
  }
  return std::clamp(trapezoid(xs, ys) / xs.back(), 0.0, 1.0);
}

double subspace_capacity(std::span<const Stimulus> columns) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  if (n < 2) fail(ErrorKind::InvalidArgument, "subspace capacity needs at least two columns");
  const auto dim = static_cast<Eigen::Index>(columns.front().size());
  Eigen::MatrixXd x(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& c = columns[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(c.size()) != dim) fail(ErrorKind::ShapeMismatch, "columns differ in length");
    if (c.energy() == 0.0) fail(ErrorKind::ZeroVector, "subspace column is the zero vector");
    for (Eigen::Index i = 0; i < dim; ++i) x(i, j) = c[static_cast<std::size_t>(i)] / c.energy();
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  const double nuclear = svd.singularValues().sum();
  const double root_n = std::sqrt(static_cast<double>(n));
  return std::clamp((nuclear - root_n) / (static_cast<double>(n) - root_n), 0.0, 1.0);
}

double subspace_capacity(const SubspaceSample& sample) { return subspace_capacity(sample.columns); }

PrincipalBasis::PrincipalBasis(const StimulusSet& task) {
  if (task.size() < 2) fail(ErrorKind::InvalidArgument, "principal basis needs at least two task stimuli");
  const auto n = static_cast<Eigen::Index>(task.size());
  const auto dim = static_cast<Eigen::Index>(task.shape().size());
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) data(i, j) = task[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorKind::RankDeficient, "task covariance eigendecomposition failed");
  variances_ = eig.eigenvalues().reverse();
  if (!(variances_[0] > 0.0)) fail(ErrorKind::RankDeficient, "task stimuli have zero covariance");
  axes_ = eig.eigenvectors().rowwise().reverse().transpose();
}

double PrincipalBasis::l1_score(const Stimulus& x) const {
  if (static_cast<Eigen::Index>(x.size()) != axes_.cols()) fail(ErrorKind::ShapeMismatch, "alignment shape mismatch");
  if (x.energy() == 0.0) fail(ErrorKind::ZeroVector, "alignment of the zero vector");
  const Eigen::Map<const Eigen::VectorXd> v(x.values().data(), axes_.cols());
  return (axes_ * v).lpNorm<1>() / x.energy();
}

Alignment subspace_alignment(const SubspaceSample& sample, const PrincipalBasis& basis, const Stimulus* reference) {
  if (sample.columns.empty()) fail(ErrorKind::EmptySet, "alignment of an empty subspace sample");
  Alignment out;
  double sum = 0.0;
  for (const auto& c : sample.columns) sum += basis.l1_score(c);
  out.raw = sum / static_cast<double>(sample.columns.size());
  if (reference) out.normalized = out.raw - basis.l1_score(*reference);
  return out;
}

Alignment subspace_alignment(const SubspaceSample& sample, const StimulusSet& task, const Stimulus* reference) {
  return subspace_alignment(sample, PrincipalBasis(task), reference);
}

std::string_view to_string(Series s) {
  switch (s) {
    case Series::Invariance: return "invariance";
    case Series::Selectivity: return "selectivity";
    case Series::RandomWalk: return "random_walk";
  }
  return "invariance";
}

std::vector<FdSample> FitnessDistanceDiagram::arccos_view() const {
  std::vector<FdSample> out = samples;
  for (auto& s : out) s.fitness = std::acos(std::clamp(s.fitness / optimum_fitness, -1.0, 1.0));
  return out;
}

FitnessDistanceDiagram build_fd_diagram(std::span<const PathResult> paths, std::span<const WalkSample> walks,
                                        double optimum_fitness) {
  if (paths.empty() && walks.empty()) fail(ErrorKind::EmptySet, "fitness-distance diagram needs at least one series");
  FitnessDistanceDiagram d;
  d.optimum_fitness = optimum_fitness;
  for (const auto& p : paths) {
    check_path(p);
    const Series series = p.kind == PathKind::Invariance ? Series::Invariance : Series::Selectivity;
    for (std::size_t k = 0; k < p.deltas.size(); ++k) d.samples.push_back({p.deltas[k], p.fitnesses[k], series});
  }
  for (const auto& w : walks) d.samples.push_back({w.delta, w.fitness, Series::RandomWalk});

  for (const auto& s : d.samples) d.grid.push_back(s.delta);
  std::sort(d.grid.begin(), d.grid.end());
  d.grid.erase(std::unique(d.grid.begin(), d.grid.end()), d.grid.end());

  for (Series series : {Series::Invariance, Series::Selectivity, Series::RandomWalk}) {
    std::vector<double> sum(d.grid.size(), 0.0);
    std::vector<int> count(d.grid.size(), 0);
    for (const auto& s : d.samples) {
      if (s.series != series) continue;
      const auto k = static_cast<std::size_t>(std::lower_bound(d.grid.begin(), d.grid.end(), s.delta) - d.grid.begin());
      sum[k] += s.fitness;
      ++count[k];
    }
    if (std::all_of(count.begin(), count.end(), [](int c) { return c == 0; })) continue;
    auto& means = d.means[series];
    means.resize(d.grid.size());
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
      if (count[k] > 0) means[k] = sum[k] / count[k];
    }
  }
  return d;
}

}  // namespace tuneprobe
