#include "tuneprobe/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "json_codec.hpp"
#include "tuneprobe/error.hpp"
#include "tuneprobe/seeding.hpp"
#include "tuneprobe/stats.hpp"
#include "tuneprobe/work_pool.hpp"

namespace tuneprobe {

using nlohmann::json;
using namespace codec;

void TaskSpec::validate() const {
  if (n_classes < 2) fail(ErrorKind::Config, "task needs at least two classes");
  if (samples_per_class < 1) fail(ErrorKind::Config, "samples_per_class must be positive");
  if (shape.height < 1 || shape.width < 1) fail(ErrorKind::Config, "task shape must be positive");
  if (!(frequency_min > 0.0) || frequency_max < frequency_min) fail(ErrorKind::Config, "bad frequency range");
  if (!(envelope > 0.0)) fail(ErrorKind::Config, "envelope must be positive");
  if (orientation_jitter < 0.0 || frequency_jitter < 0.0 || phase_jitter < 0.0 || position_jitter < 0.0 ||
      noise < 0.0) {
    fail(ErrorKind::Config, "jitter ranges must be non-negative");
  }
  if (!(energy > 0.0)) fail(ErrorKind::Config, "task energy must be positive");
}

namespace {

double uniform_pm(Rng& rng, double half_width) {
  if (half_width == 0.0) return 0.0;
  return std::uniform_real_distribution<double>(-half_width, half_width)(rng);
}

}  // namespace

StimulusSet generate_task_stimuli(const TaskSpec& spec) {
  spec.validate();
  struct Prototype {
    double orientation;
    double frequency;
  };
  std::vector<Prototype> classes;
  Rng class_rng(derive_seed(spec.seed, "classes"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < spec.n_classes; ++k) {
    const double orientation = std::numbers::pi * (k + unit(class_rng)) / spec.n_classes;
    const double frequency = spec.frequency_min + (spec.frequency_max - spec.frequency_min) * unit(class_rng);
    classes.push_back({orientation, frequency});
  }

  const int h = spec.shape.height;
  const int w = spec.shape.width;
  const double sigma = spec.envelope * std::max(h, w);
  std::vector<Stimulus> items;
  std::vector<int> labels;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < spec.n_classes; ++k) {
    for (int s = 0; s < spec.samples_per_class; ++s) {
      const auto index = static_cast<std::uint64_t>(k) * spec.samples_per_class + s;
      Rng rng(derive_seed(spec.seed, "item", index));
      const double theta = classes[k].orientation + uniform_pm(rng, spec.orientation_jitter);
      const double freq = classes[k].frequency * (1.0 + uniform_pm(rng, spec.frequency_jitter));
      const double phase = uniform_pm(rng, spec.phase_jitter);
      const double cy = 0.5 * (h - 1) + uniform_pm(rng, spec.position_jitter);
      const double cx = 0.5 * (w - 1) + uniform_pm(rng, spec.position_jitter);
      std::vector<double> v(spec.shape.size());
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double dy = y - cy;
          const double dx = x - cx;
          const double envelope = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
          const double carrier = std::cos(2.0 * std::numbers::pi * freq * (dx * std::cos(theta) + dy * std::sin(theta)) + phase);
          v[static_cast<std::size_t>(y) * w + x] = envelope * carrier;
        }
      }
      if (spec.noise > 0.0) {
        const double rms = norm(v) / std::sqrt(static_cast<double>(v.size()));
        for (double& p : v) p += spec.noise * rms * gauss(rng);
      }
      double mean = 0.0;
      for (double p : v) mean += p;
      mean /= static_cast<double>(v.size());
      for (double& p : v) p -= mean;
      items.push_back(project_sphere(v, spec.energy, spec.shape));
      labels.push_back(k);
    }
  }
  return StimulusSet(std::move(items), std::move(labels));
}

PairSplit split_pairs(const StimulusSet& task, int n_pairs, std::uint64_t split_seed) {
  if (!task.labeled()) fail(ErrorKind::DegenerateSplit, "pair matching needs a labeled task set");
  if (n_pairs < 2) fail(ErrorKind::DegenerateSplit, "pair matching needs at least two pairs per split");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < task.size(); ++i) by_class[task.label(i)].push_back(i);
  if (by_class.size() < 2) fail(ErrorKind::DegenerateSplit, "pair matching needs at least two classes");

  Rng rng(split_seed);
  std::vector<std::vector<std::size_t>> halves[2];
  for (auto& [label, members] : by_class) {
    if (members.size() < 4) {
      fail(ErrorKind::DegenerateSplit, "class " + std::to_string(label) + " has fewer than four items");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto mid = static_cast<std::ptrdiff_t>(members.size() / 2);
    halves[0].emplace_back(members.begin(), members.begin() + mid);
    halves[1].emplace_back(members.begin() + mid, members.end());
  }

  auto draw = [&](const std::vector<std::vector<std::size_t>>& pool) {
    std::vector<Pair> pairs;
    std::uniform_int_distribution<std::size_t> pick_class(0, pool.size() - 1);
    for (int p = 0; p < n_pairs; ++p) {
      if (p % 2 == 0) {
        const auto& members = pool[pick_class(rng)];
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (j == i) j = pick(rng);
        pairs.push_back({members[i], members[j], true});
      } else {
        const std::size_t c1 = pick_class(rng);
        std::size_t c2 = pick_class(rng);
        while (c2 == c1) c2 = pick_class(rng);
        std::uniform_int_distribution<std::size_t> pick1(0, pool[c1].size() - 1);
        std::uniform_int_distribution<std::size_t> pick2(0, pool[c2].size() - 1);
        pairs.push_back({pool[c1][pick1(rng)], pool[c2][pick2(rng)], false});
      }
    }
    return pairs;
  };
  PairSplit split;
  split.train = draw(halves[0]);
  split.test = draw(halves[1]);
  return split;
}

double threshold_accuracy(std::span<const double> distances, const std::vector<Pair>& pairs, double threshold) {
  if (pairs.empty() || distances.size() != pairs.size()) fail(ErrorKind::DegenerateSplit, "no pairs to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if ((distances[i] <= threshold) == pairs[i].same) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

double fit_threshold(std::span<const double> distances, const std::vector<Pair>& pairs) {
  if (pairs.empty() || distances.size() != pairs.size()) fail(ErrorKind::DegenerateSplit, "no pairs to fit");
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  double best_threshold = sorted.front();
  double best_accuracy = -1.0;
  for (int q = 0; q <= 100; ++q) {
    const auto rank = static_cast<std::size_t>(std::llround(q / 100.0 * static_cast<double>(sorted.size() - 1)));
    const double t = sorted[rank];
    const double accuracy = threshold_accuracy(distances, pairs, t);
    if (accuracy > best_accuracy) {
      best_accuracy = accuracy;
      best_threshold = t;
    }
  }
  return best_threshold;
}

namespace {

std::vector<double> pair_distances(const std::vector<ResponseVector>& reps, const std::vector<Pair>& pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto& a = reps.at(p.a);
    const auto& b = reps.at(p.b);
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    d.push_back(std::sqrt(ss));
  }
  return d;
}

}  // namespace

PairMatchResult pair_matching(const std::vector<ResponseVector>& representations, const PairSplit& split) {
  const auto train = pair_distances(representations, split.train);
  const auto test = pair_distances(representations, split.test);
  PairMatchResult r;
  r.threshold = fit_threshold(train, split.train);
  r.train_accuracy = threshold_accuracy(train, split.train, r.threshold);
  r.test_accuracy = threshold_accuracy(test, split.test, r.threshold);
  return r;
}

PairMatchResult pair_matching(const TargetHandle& target, const StimulusSet& task, int n_pairs,
                              std::uint64_t split_seed) {
  if (task.shape() != target.input_shape()) fail(ErrorKind::ShapeMismatch, "task and target shapes differ");
  const PairSplit split = split_pairs(task, n_pairs, split_seed);
  std::vector<ResponseVector> reps;
  reps.reserve(task.size());
  for (const auto& x : task.items()) reps.push_back(target.evaluate(x));
  return pair_matching(reps, split);
}

double pair_matching_performance(const TargetHandle& target, const StimulusSet& task, int n_pairs,
                                 std::uint64_t split_seed) {
  return pair_matching(target, task, n_pairs, split_seed).test_accuracy;
}

std::vector<std::size_t> sample_references(const StimulusSet& task, int n, std::uint64_t seed) {
  if (n < 1 || static_cast<std::size_t>(n) > task.size()) {
    fail(ErrorKind::InvalidArgument, "reference count must be in [1, task size]");
  }
  std::vector<std::size_t> order(task.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(n));
  return order;
}

void StudyConfig::validate() const {
  search.validate();
  if (n_references < 1) fail(ErrorKind::Config, "n_references must be positive");
  if (n_pairs < 2) fail(ErrorKind::Config, "n_pairs must be at least 2");
  if (!(osep_top_fraction > 0.0) || osep_top_fraction > 1.0) fail(ErrorKind::Config, "osep_top_fraction must be in (0, 1]");
  if (osep_units < 1) fail(ErrorKind::Config, "osep_units must be positive");
  if (!(subspace_delta > 0.0) || subspace_delta > std::numbers::pi) fail(ErrorKind::Config, "subspace_delta out of range");
  if (subspace_runs < 2) fail(ErrorKind::Config, "subspace_runs must be at least 2");
  if (reconstructions < 1) fail(ErrorKind::Config, "reconstructions must be positive");
  if (permutations < 1) fail(ErrorKind::Config, "permutations must be positive");
  if (workers < 1) fail(ErrorKind::Config, "workers must be positive");
}

const std::vector<std::string>& study_measure_names() {
  static const std::vector<std::string> names{"osep", "inpp", "slpp", "insc", "itsa", "stsa", "tses"};
  return names;
}

double NetworkRecord::measure(const std::string& name) const {
  const std::optional<double>* v = nullptr;
  if (name == "osep") v = &measures.osep;
  else if (name == "inpp") v = &measures.inpp;
  else if (name == "slpp") v = &measures.slpp;
  else if (name == "insc") v = &measures.insc;
  else if (name == "itsa") v = &measures.itsa;
  else if (name == "stsa") v = &measures.stsa;
  else if (name == "tses") v = &measures.tses;
  else fail(ErrorKind::InvalidArgument, "unknown measure '" + name + "'");
  if (!v->has_value()) fail(ErrorKind::InvalidArgument, "measure '" + name + "' missing for network " + std::to_string(index));
  return **v;
}

std::filesystem::path network_dir(const std::filesystem::path& root, int index) {
  char name[32];
  std::snprintf(name, sizeof name, "network_%03d", index);
  return root / name;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_doubles(std::uint64_t h, std::span<const double> v) { return fnv1a(h, v.data(), v.size_bytes()); }

std::uint64_t hash_string(std::uint64_t h, const std::string& s) { return fnv1a(h, s.data(), s.size()); }

std::string config_signature(const StudyConfig& c) {
  const SearchConfig& s = c.search;
  std::ostringstream os;
  os << c.seed << '|' << c.n_references << '|' << c.n_pairs << '|' << fmt(c.osep_top_fraction) << '|' << c.osep_units
     << '|' << fmt(c.subspace_delta) << '|' << c.subspace_runs << '|' << c.reconstructions << '|'
     << fmt(s.optimum_budget_factor) << '|' << fmt(s.path_budget_factor) << '|' << fmt(s.reconstruct_budget_factor)
     << '|' << fmt(s.optimum_initial_step) << '|' << fmt(s.path_initial_step) << '|' << s.optimum_runs << '|'
     << s.init_candidates << '|' << s.solver.step_tolerance << '|' << s.solver.stagnation_window << '|'
     << s.solver.repeat_evaluations << '|' << (s.solver.population_size ? *s.solver.population_size : 0);
  for (double a : s.alpha_set) os << '|' << fmt(a);
  for (double d : s.deltas) os << '|' << fmt(d);
  return os.str();
}

std::string fingerprint(const TargetHandle& network, int index, const StimulusSet& task,
                        const std::vector<std::size_t>& references, const StudyConfig& config) {
  std::uint64_t h = 14695981039346656037ULL;
  h = hash_string(h, config_signature(config));
  h = hash_string(h, network.describe() + "#" + std::to_string(index));
  for (const auto& x : task.items()) h = hash_doubles(h, x.values());
  for (std::size_t r : references) h = fnv1a(h, &r, sizeof r);
  // Responses to two task items tie the fingerprint to the actual weights.
  h = hash_doubles(h, network.evaluate(task[0]));
  h = hash_doubles(h, network.evaluate(task[task.size() - 1]));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json stimuli_json(std::span<const Stimulus> xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(std::vector<double>(x.values().begin(), x.values().end()));
  return a;
}

std::vector<Stimulus> stimuli_from_json(const json& a, Shape shape) {
  std::vector<Stimulus> out;
  for (const auto& v : a) out.emplace_back(shape, v.get<std::vector<double>>());
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp);
    out << text;
    if (!out) fail(ErrorKind::Io, "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp + ": " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_strip(const std::filesystem::path& path, std::span<const Stimulus> panels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  write_pgm_strip(out, panels);
}

json path_json(const PathResult& p) {
  return json{{"kind", std::string(to_string(p.kind))},
              {"deltas", p.deltas},
              {"fitnesses", p.fitnesses},
              {"points", stimuli_json(p.points)}};
}

json subspace_json(const SubspaceSample& s) {
  return json{{"kind", std::string(to_string(s.kind))},
              {"delta", s.delta},
              {"fitnesses", s.fitnesses},
              {"columns", stimuli_json(s.columns)}};
}

std::optional<NetworkRecord> load_record(const std::filesystem::path& dir, const std::string& expected) {
  const auto path = dir / "result.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const json j = json::parse(read_text(path));
    if (j.at("fingerprint").get<std::string>() != expected) return std::nullopt;
    NetworkRecord r;
    r.index = j.at("index").get<int>();
    r.description = j.at("description").get<std::string>();
    r.performance = j.at("performance").get<double>();
    r.measures = measures_from_json(j.at("measures"));
    r.unit_ossc = optional_from_json(j, "unit_ossc");
    r.audit = audit_from_json(j.at("audit"));
    r.fingerprint = expected;
    r.resumed = true;
    return r;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string record_json(const NetworkRecord& r) {
  const json j{{"index", r.index},
               {"description", r.description},
               {"fingerprint", r.fingerprint},
               {"performance", r.performance},
               {"measures", measures_json(r.measures)},
               {"unit_ossc", optional_json(r.unit_ossc)},
               {"audit", audit_json(r.audit)}};
  return j.dump(2) + "\n";
}

}  // namespace

NetworkRecord characterize_network(const TargetHandle& network, int index, const StimulusSet& task,
                                   const PrincipalBasis& basis, const std::vector<std::size_t>& references,
                                   const StudyConfig& config) {
  if (task.shape() != network.input_shape()) fail(ErrorKind::ShapeMismatch, "task and network shapes differ");
  if (references.empty()) fail(ErrorKind::EmptySet, "study needs reference stimuli");

  const std::string print = fingerprint(network, index, task, references, config);
  std::filesystem::path dir;
  if (!config.artifact_dir.empty()) {
    dir = network_dir(config.artifact_dir, index);
    if (config.resume) {
      if (auto loaded = load_record(dir, print)) return *loaded;
    }
    std::filesystem::create_directories(dir);
  }

  const std::uint64_t network_seed = derive_seed(config.seed, "network", static_cast<std::uint64_t>(index));
  SearchConfig search = config.search;
  search.energy = average_energy(task);
  auto job_config = [&](const std::string& job) {
    SearchConfig c = search;
    c.seed = derive_seed(network_seed, job);
    return c;
  };

  NetworkRecord record;
  record.index = index;
  record.description = network.describe();
  record.fingerprint = print;
  record.performance = pair_matching_performance(network, task, config.n_pairs, derive_seed(config.seed, "split"));

  // Unit optimal stimuli: OSEP and OSSC.
  const int units = std::min(config.osep_units, network.response_dim());
  std::vector<Stimulus> unit_optima;
  std::vector<double> unit_fitness;
  double osep_sum = 0.0;
  double ossc_sum = 0.0;
  for (int u = 0; u < units; ++u) {
    const auto result = optimal_stimulus(unit_view(network, u), job_config("unit/" + std::to_string(u)));
    record.audit.check_sphere(result.x_hat, search.energy);
    osep_sum += explanation_power(result.x_hat, task, config.osep_top_fraction);
    ossc_sum += spectral_complexity(result.x_hat);
    unit_optima.push_back(result.x_hat);
    unit_fitness.push_back(result.fitness_at_optimum);
  }
  record.measures.osep = osep_sum / units;
  record.unit_ossc = ossc_sum / units;

  // Population optimum anchored at the most strongly driving reference.
  std::size_t best_ref = references.front();
  double best_norm = -1.0;
  for (std::size_t r : references) {
    const double n = norm(network.evaluate(task[r]));
    if (n > best_norm) {
      best_norm = n;
      best_ref = r;
    }
  }
  const TargetHandle anchored = match_fitness(network, network.evaluate(task[best_ref]));
  const auto population = optimal_stimulus(anchored, job_config("population"));
  const Stimulus& x_hat = population.x_hat;
  record.audit.check_sphere(x_hat, search.energy);

  const PathResult inv = invariance_path(network, x_hat, job_config("paths"));
  const PathResult sel = selectivity_path(network, x_hat, job_config("paths"));
  record.audit.check(inv, x_hat, search.energy);
  record.audit.check(sel, x_hat, search.energy);
  record.measures.inpp = path_potential_population(inv);
  record.measures.slpp = path_potential_population(sel);

  const SubspaceSample inv_sub = subspace_sample(network, x_hat, PathKind::Invariance, config.subspace_delta,
                                                 config.subspace_runs, job_config("subspace"));
  const SubspaceSample sel_sub = subspace_sample(network, x_hat, PathKind::Selectivity, config.subspace_delta,
                                                 config.subspace_runs, job_config("subspace"));
  record.audit.check(inv_sub, x_hat, search.energy);
  record.audit.check(sel_sub, x_hat, search.energy);
  record.measures.insc = subspace_capacity(inv_sub);
  const Alignment ia = subspace_alignment(inv_sub, basis, &x_hat);
  const Alignment sa = subspace_alignment(sel_sub, basis, &x_hat);
  record.measures.itsa = ia.raw;
  record.measures.stsa = sa.raw;
  record.measures.itsa_normalized = ia.normalized;
  record.measures.stsa_normalized = sa.normalized;

  // Encoding specificity over every reference.
  json recon_json = json::array();
  double tses_sum = 0.0;
  for (std::size_t k = 0; k < references.size(); ++k) {
    const Stimulus& ref = task[references[k]];
    const auto recons = reconstruct(network, ref, config.reconstructions, job_config("reconstruct/" + std::to_string(k)));
    for (const auto& x : recons.reconstructions) record.audit.check_sphere(x, ref.energy());
    tses_sum += encoding_specificity(recons);
    if (!dir.empty()) {
      recon_json.push_back(json{{"reference", references[k]},
                                {"fitnesses", recons.fitnesses},
                                {"points", stimuli_json(recons.reconstructions)}});
    }
  }
  record.measures.tses = tses_sum / static_cast<double>(references.size());

  auto& prov = record.measures.provenance;
  prov["network_seed"] = std::to_string(network_seed);
  prov["energy"] = fmt(search.energy);
  prov["units"] = std::to_string(units);
  prov["best_reference"] = std::to_string(best_ref);
  prov["subspace_runs"] = std::to_string(config.subspace_runs);
  prov["reconstructions"] = std::to_string(config.reconstructions);
  prov["optimum_budget"] = std::to_string(search.budget(search.optimum_budget_factor, x_hat.size()));
  prov["path_budget"] = std::to_string(search.budget(search.path_budget_factor, x_hat.size()));
  prov["reconstruct_budget"] = std::to_string(search.budget(search.reconstruct_budget_factor, x_hat.size()));

  if (!dir.empty()) {
    const json artifacts{{"shape", {x_hat.height(), x_hat.width()}},
                         {"energy", search.energy},
                         {"unit_optima", stimuli_json(unit_optima)},
                         {"unit_fitness", unit_fitness},
                         {"best_reference", best_ref},
                         {"population_x_hat", std::vector<double>(x_hat.values().begin(), x_hat.values().end())},
                         {"population_fitness", population.fitness_at_optimum},
                         {"invariance_path", path_json(inv)},
                         {"selectivity_path", path_json(sel)},
                         {"invariance_subspace", subspace_json(inv_sub)},
                         {"selectivity_subspace", subspace_json(sel_sub)},
                         {"reconstructions", recon_json}};
    write_text_atomic(dir / "artifacts.json", artifacts.dump() + "\n");
    write_strip(dir / "unit_optima.pgm", unit_optima);
    std::vector<Stimulus> strip{x_hat};
    strip.insert(strip.end(), inv.points.begin(), inv.points.end());
    write_strip(dir / "invariance_path.pgm", strip);
    strip.resize(1);
    strip.insert(strip.end(), sel.points.begin(), sel.points.end());
    write_strip(dir / "selectivity_path.pgm", strip);
    // result.json goes last: its presence marks a finished network.
    write_text_atomic(dir / "result.json", record_json(record));
  }
  return record;
}

MeasureReport recompute_measures(const std::filesystem::path& dir, const StimulusSet& task, const StudyConfig& config) {
  json a;
  try {
    a = json::parse(read_text(dir / "artifacts.json"));
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "bad artifact file in " + dir.string() + ": " + e.what());
  }
  const Shape shape{a.at("shape").at(0).get<int>(), a.at("shape").at(1).get<int>()};
  MeasureReport m;

  const auto unit_optima = stimuli_from_json(a.at("unit_optima"), shape);
  double osep = 0.0;
  for (const auto& x : unit_optima) osep += explanation_power(x, task, config.osep_top_fraction);
  m.osep = osep / static_cast<double>(unit_optima.size());

  auto path = [&](const json& j) {
    PathResult p;
    p.kind = path_kind_from_string(j.at("kind").get<std::string>());
    p.deltas = j.at("deltas").get<std::vector<double>>();
    p.fitnesses = j.at("fitnesses").get<std::vector<double>>();
    return p;
  };
  m.inpp = path_potential_population(path(a.at("invariance_path")));
  m.slpp = path_potential_population(path(a.at("selectivity_path")));

  auto subspace = [&](const json& j) {
    SubspaceSample s;
    s.kind = path_kind_from_string(j.at("kind").get<std::string>());
    s.delta = j.at("delta").get<double>();
    s.columns = stimuli_from_json(j.at("columns"), shape);
    return s;
  };
  const Stimulus x_hat(shape, a.at("population_x_hat").get<std::vector<double>>());
  const PrincipalBasis basis(task);
  const SubspaceSample inv = subspace(a.at("invariance_subspace"));
  const SubspaceSample sel = subspace(a.at("selectivity_subspace"));
  m.insc = subspace_capacity(inv);
  const Alignment ia = subspace_alignment(inv, basis, &x_hat);
  const Alignment sa = subspace_alignment(sel, basis, &x_hat);
  m.itsa = ia.raw;
  m.stsa = sa.raw;
  m.itsa_normalized = ia.normalized;
  m.stsa_normalized = sa.normalized;

  double tses = 0.0;
  const auto& recons = a.at("reconstructions");
  for (const auto& r : recons) {
    ReconstructionSet set;
    set.reference = task[r.at("reference").get<std::size_t>()];
    set.reconstructions = stimuli_from_json(r.at("points"), shape);
    tses += encoding_specificity(set);
  }
  m.tses = tses / static_cast<double>(recons.size());
  return m;
}

namespace {

std::string display_name(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<CorrelationRow> correlation_table(const std::vector<NetworkRecord>& networks, const StudyConfig& config) {
  const auto& names = study_measure_names();
  std::vector<double> performance;
  for (const auto& n : networks) performance.push_back(n.performance);
  std::vector<CorrelationRow> rows;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(networks.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> values;
    for (std::size_t i = 0; i < networks.size(); ++i) {
      values.push_back(networks[i].measure(names[m]));
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = values.back();
    }
    CorrelationRow row;
    row.measure = display_name(names[m]);
    if (networks.size() < 3) {
      rows.push_back(row);
      continue;
    }
    const PairedSeries series(values, performance);
    row.spearman = spearman(series);
    row.pearson = pearson(series);
    row.r2 = *row.pearson * *row.pearson;
    row.p_perm = permutation_test(values, performance, TestStatistic::Slope, config.permutations,
                                  derive_seed(config.seed, "permutation/" + names[m]));
    rows.push_back(row);
  }
  CorrelationRow all;
  all.measure = "ALL";
  if (features.rows() > features.cols() + 1) {
    all.r2 = multiple_r2(features, performance);
    all.pearson = std::sqrt(*all.r2);
  }
  rows.push_back(all);
  return rows;
}

std::string measures_csv(const std::vector<NetworkRecord>& networks) {
  std::string out = "network,performance";
  for (const auto& n : study_measure_names()) out += "," + n;
  out += ",itsa_normalized,stsa_normalized,unit_ossc\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : networks) {
    out += std::to_string(r.index) + "," + fmt(r.performance);
    for (const auto& n : study_measure_names()) out += "," + fmt(r.measure(n));
    out += "," + cell(r.measures.itsa_normalized) + "," + cell(r.measures.stsa_normalized) + "," + cell(r.unit_ossc) + "\n";
  }
  return out;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string out = "measure,spearman,pearson,p_perm,r2\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    out += r.measure + "," + cell(r.spearman) + "," + cell(r.pearson) + "," + cell(r.p_perm) + "," + cell(r.r2) + "\n";
  }
  return out;
}

BenchResult run_study(const std::vector<TargetHandle>& population, const StimulusSet& task,
                      const std::vector<std::size_t>& references, const StudyConfig& config) {
  config.validate();
  if (population.empty()) fail(ErrorKind::EmptySet, "study needs at least one network");
  if (!task.labeled()) fail(ErrorKind::InvalidArgument, "study needs a labeled task set");
  for (std::size_t r : references) {
    if (r >= task.size()) fail(ErrorKind::IndexOutOfRange, "reference index outside the task set");
  }
  const PrincipalBasis basis(task);
  if (!config.artifact_dir.empty()) std::filesystem::create_directories(config.artifact_dir);

  BenchResult result;
  result.networks.resize(population.size());
  parallel_for(population.size(), config.workers, [&](std::size_t i) {
    result.networks[i] = characterize_network(population[i], static_cast<int>(i), task, basis, references, config);
  });
  for (const auto& n : result.networks) result.audit.merge(n.audit);

  if (!config.artifact_dir.empty()) write_text_atomic(config.artifact_dir / "measures.csv", measures_csv(result.networks));
  result.table = correlation_table(result.networks, config);
  if (!config.artifact_dir.empty()) {
    write_text_atomic(config.artifact_dir / "correlations.csv", correlation_csv(result.table));
  }
  return result;
}

}  // namespace tuneprobe
