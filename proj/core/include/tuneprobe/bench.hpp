#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tuneprobe/measures.hpp"
#include "tuneprobe/search.hpp"
#include "tuneprobe/stimulus.hpp"
#include "tuneprobe/targets.hpp"

namespace tuneprobe {

/// Oriented-texture classification task. Each class is a windowed grating
/// with its own orientation and spatial frequency; items jitter around the
/// class prototype.
struct TaskSpec {
  int n_classes = 12;
  int samples_per_class = 40;
  Shape shape{21, 21};
  double frequency_min = 0.08;      // cycles per pixel
  double frequency_max = 0.25;
  double envelope = 0.3;            // Gaussian envelope sigma, fraction of the side
  double orientation_jitter = 0.2;  // radians, uniform +-
  double frequency_jitter = 0.15;   // relative, uniform +-
  double phase_jitter = 3.141592653589793;
  double position_jitter = 2.0;     // pixels, uniform +-
  double noise = 0.2;               // white noise std relative to the per-pixel rms
  double energy = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Labeled set, n_classes * samples_per_class items, every item with norm
/// `energy`. Labels are class indices; items are grouped by class.
StimulusSet generate_task_stimuli(const TaskSpec& spec);

struct Pair {
  std::size_t a = 0;
  std::size_t b = 0;
  bool same = false;
};

/// Pairs drawn from disjoint item halves of every class.
struct PairSplit {
  std::vector<Pair> train;
  std::vector<Pair> test;
};

/// n_pairs balanced same/different pairs per split. Throws DegenerateSplit
/// when a class has fewer than four items or there are fewer than two classes.
PairSplit split_pairs(const StimulusSet& task, int n_pairs, std::uint64_t split_seed);

/// Distance threshold maximizing accuracy of `distance <= threshold` as the
/// same-class prediction. Candidates are the 0..100 percentiles of the
/// distances; ties keep the smallest threshold.
double fit_threshold(std::span<const double> distances, const std::vector<Pair>& pairs);

double threshold_accuracy(std::span<const double> distances, const std::vector<Pair>& pairs, double threshold);

struct PairMatchResult {
  double threshold = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Representation distances computed once per item; the threshold is fit on
/// the train pairs only.
PairMatchResult pair_matching(const std::vector<ResponseVector>& representations, const PairSplit& split);
PairMatchResult pair_matching(const TargetHandle& target, const StimulusSet& task, int n_pairs,
                              std::uint64_t split_seed);

/// Held-out accuracy of pair_matching.
double pair_matching_performance(const TargetHandle& target, const StimulusSet& task, int n_pairs,
                                 std::uint64_t split_seed);

/// n indices sampled uniformly without replacement, in draw order.
std::vector<std::size_t> sample_references(const StimulusSet& task, int n, std::uint64_t seed);

struct StudyConfig {
  /// Template search settings; seed and energy are set per network.
  SearchConfig search;
  std::uint64_t seed = 1;
  int n_references = 16;
  int n_pairs = 200;
  double osep_top_fraction = 0.01;
  /// Top-layer units characterized for OSEP and OSSC (the first k).
  int osep_units = 32;
  double subspace_delta = 0.1 * 3.141592653589793;
  int subspace_runs = 20;
  int reconstructions = 10;
  int permutations = 10000;
  int workers = 1;
  /// Per-network artifacts are written here when non-empty.
  std::filesystem::path artifact_dir;
  /// Reuse per-network results whose fingerprint matches.
  bool resume = false;

  void validate() const;
};

/// The seven task-level measures in table order.
const std::vector<std::string>& study_measure_names();

struct NetworkRecord {
  int index = 0;
  std::string description;
  double performance = 0.0;
  /// osep, inpp, slpp, insc, itsa, stsa, tses (+ normalized alignments).
  MeasureReport measures;
  /// Mean OSSC over the characterized units.
  std::optional<double> unit_ossc;
  ConstraintAudit audit;
  bool resumed = false;
  std::string fingerprint;

  /// Value of a measure by table name ("osep", ...).
  double measure(const std::string& name) const;
};

struct CorrelationRow {
  std::string measure;
  std::optional<double> spearman;
  std::optional<double> pearson;
  std::optional<double> p_perm;
  std::optional<double> r2;
};

struct BenchResult {
  std::vector<NetworkRecord> networks;
  std::vector<CorrelationRow> table;
  ConstraintAudit audit;
};

/// Characterizes one network. Writes artifacts under artifact_dir when set.
NetworkRecord characterize_network(const TargetHandle& network, int index, const StimulusSet& task,
                                   const PrincipalBasis& basis, const std::vector<std::size_t>& references,
                                   const StudyConfig& config);

/// Spearman/pearson/permutation p of each measure against performance, then
/// multiple R^2 of all measures (ALL). Statistics that need more networks
/// than available (three per measure, eight for ALL) are left empty.
/// Throws ZeroVariance or RankDeficient on degenerate measure columns.
std::vector<CorrelationRow> correlation_table(const std::vector<NetworkRecord>& networks, const StudyConfig& config);

/// Full study: characterize every network (in parallel), persist the per-network
/// measure table, then run the correlation stage. Per-network artifacts and
/// measures.csv are written before correlation errors propagate.
BenchResult run_study(const std::vector<TargetHandle>& population, const StimulusSet& task,
                      const std::vector<std::size_t>& references, const StudyConfig& config);

/// Recomputes the seven measures from the artifacts of one network.
MeasureReport recompute_measures(const std::filesystem::path& network_dir, const StimulusSet& task,
                                 const StudyConfig& config);

std::filesystem::path network_dir(const std::filesystem::path& root, int index);

std::string measures_csv(const std::vector<NetworkRecord>& networks);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

}  // namespace tuneprobe
