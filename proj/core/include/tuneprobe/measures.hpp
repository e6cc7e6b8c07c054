#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tuneprobe/search.hpp"
#include "tuneprobe/stimulus.hpp"

namespace tuneprobe {

// ---------------------------------------------------------------------------
// First-order measures.

/// Non-sparsity of the 2-D DFT magnitude spectrum, (|F|_1/|F|_2 - 1)/(sqrt(M) - 1).
/// 0 for a single nonzero bin, 1 for a flat magnitude spectrum. Scale and
/// circular-shift invariant.
double spectral_complexity(const Stimulus& x_hat);

/// Mean of the top `top_fraction` rectified cosines between task stimuli and
/// x_hat (both unit-normalized before the inner product).
double explanation_power(const Stimulus& x_hat, const StimulusSet& task, double top_fraction = 1.0);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// SsimParams with dynamic_range = max - min of the reference.
SsimParams ssim_params_for(const Stimulus& reference);

/// Mean SSIM over all fully contained Gaussian windows.
double ssim(const Stimulus& a, const Stimulus& b, const SsimParams& params);

/// Mean SSIM between the reference and each reconstruction.
double encoding_specificity(const ReconstructionSet& recons, const SsimParams& params);
double encoding_specificity(const ReconstructionSet& recons);

// ---------------------------------------------------------------------------
// Path and subspace measures.

/// Area between the arccos-transformed path and the cosine baseline,
/// normalized so a flat path scores 1 and the baseline 0. Responses are
/// divided by f_at_optimum and clamped to [-1, 1]; the integral is trapezoidal
/// over the delta grid with the (0, 1) anchor and divided by delta_max^2 / 2.
/// Results above 1 (possible only for responses below zero) saturate at 1.
/// Throws NonPositiveOptimum when f_at_optimum <= 0.
double path_potential_unit(const PathResult& path, double f_at_optimum);

/// Trapezoid integral of the recorded match fitnesses over [0, delta_max] with
/// the (0, 1) anchor, divided by delta_max.
double path_potential_population(const PathResult& path);

/// (|X|_* - sqrt(n)) / (n - sqrt(n)) over unit-normalized columns.
double subspace_capacity(std::span<const Stimulus> columns);
double subspace_capacity(const SubspaceSample& sample);

/// Principal axes of mean-centered task stimuli, strongest first, one per row.
class PrincipalBasis {
 public:
  explicit PrincipalBasis(const StimulusSet& task);

  const Eigen::MatrixXd& axes() const { return axes_; }
  const Eigen::VectorXd& variances() const { return variances_; }
  /// L1 norm of the coefficients of x / |x| in this basis.
  double l1_score(const Stimulus& x) const;

 private:
  Eigen::MatrixXd axes_;
  Eigen::VectorXd variances_;
};

struct Alignment {
  double raw = 0.0;
  std::optional<double> normalized;
};

Alignment subspace_alignment(const SubspaceSample& sample, const PrincipalBasis& basis,
                             const Stimulus* reference = nullptr);
Alignment subspace_alignment(const SubspaceSample& sample, const StimulusSet& task,
                             const Stimulus* reference = nullptr);

// ---------------------------------------------------------------------------
// Fitness-distance diagram.

enum class Series { Invariance, Selectivity, RandomWalk };

std::string_view to_string(Series s);

struct FdSample {
  double delta = 0.0;
  double fitness = 0.0;
  Series series = Series::Invariance;
};

struct FitnessDistanceDiagram {
  std::vector<FdSample> samples;
  /// Sorted distinct deltas present in the samples.
  std::vector<double> grid;
  /// Per-series mean fitness at each grid delta (absent when a series has no
  /// sample at that delta).
  std::map<Series, std::vector<std::optional<double>>> means;
  double optimum_fitness = 1.0;
  bool baseline = true;

  /// Samples with fitness replaced by arccos(clamp(f / optimum, -1, 1)).
  std::vector<FdSample> arccos_view() const;
};

FitnessDistanceDiagram build_fd_diagram(std::span<const PathResult> paths, std::span<const WalkSample> walks,
                                        double optimum_fitness);

// ---------------------------------------------------------------------------

/// The representation measures for one unit or population. Unit reports use
/// ossc/inpp/slpp/insc; population reports use osep/inpp/slpp/insc/itsa/stsa/
/// tses. Unavailable measures are left empty.
struct MeasureReport {
  std::optional<double> ossc;
  std::optional<double> osep;
  std::optional<double> tses;
  std::optional<double> inpp;
  std::optional<double> slpp;
  std::optional<double> insc;
  std::optional<double> itsa;
  std::optional<double> stsa;
  std::optional<double> itsa_normalized;
  std::optional<double> stsa_normalized;
  std::map<std::string, std::string> provenance;
};

}  // namespace tuneprobe
