#include "config.hpp"

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "tuneprobe/error.hpp"
#include "tuneprobe/seeding.hpp"

namespace tuneprobe::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void allow(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::Config, where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (const auto it = j.find(key); it != j.end()) field = it->get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Shape shape_from(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::Config, "shape must be [height, width]");
  return {j[0].get<int>(), j[1].get<int>()};
}

template <typename F>
auto config_guard(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad config value: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, e.what());
  }
}

}  // namespace

SearchConfig search_config_from_json(const json& j) {
  allow(j,
        {"energy", "optimum_budget_factor", "path_budget_factor", "reconstruct_budget_factor", "optimum_initial_step",
         "path_initial_step", "optimum_runs", "init_candidates", "alpha_set", "deltas", "deltas_pi", "full_range",
         "solver"},
        "search");
  SearchConfig c;
  read(j, "energy", c.energy);
  read(j, "optimum_budget_factor", c.optimum_budget_factor);
  read(j, "path_budget_factor", c.path_budget_factor);
  read(j, "reconstruct_budget_factor", c.reconstruct_budget_factor);
  read(j, "optimum_initial_step", c.optimum_initial_step);
  read(j, "path_initial_step", c.path_initial_step);
  read(j, "optimum_runs", c.optimum_runs);
  read(j, "init_candidates", c.init_candidates);
  read(j, "alpha_set", c.alpha_set);
  read(j, "deltas", c.deltas);
  if (const auto it = j.find("deltas_pi"); it != j.end()) {
    c.deltas.clear();
    for (double d : it->get<std::vector<double>>()) c.deltas.push_back(d * std::numbers::pi);
  }
  read(j, "full_range", c.full_range);
  if (const auto it = j.find("solver"); it != j.end()) {
    allow(*it, {"population_size", "step_tolerance", "stagnation_window", "repeat_evaluations"}, "search.solver");
    if (it->contains("population_size")) c.solver.population_size = (*it)["population_size"].get<int>();
    read(*it, "step_tolerance", c.solver.step_tolerance);
    read(*it, "stagnation_window", c.solver.stagnation_window);
    read(*it, "repeat_evaluations", c.solver.repeat_evaluations);
  }
  c.validate();
  return c;
}

TaskSpec task_spec_from_json(const json& j) {
  allow(j,
        {"n_classes", "samples_per_class", "shape", "frequency_min", "frequency_max", "envelope", "orientation_jitter",
         "frequency_jitter", "phase_jitter", "position_jitter", "noise", "energy", "seed"},
        "task");
  TaskSpec t;
  read(j, "n_classes", t.n_classes);
  read(j, "samples_per_class", t.samples_per_class);
  if (j.contains("shape")) t.shape = shape_from(j["shape"]);
  read(j, "frequency_min", t.frequency_min);
  read(j, "frequency_max", t.frequency_max);
  read(j, "envelope", t.envelope);
  read(j, "orientation_jitter", t.orientation_jitter);
  read(j, "frequency_jitter", t.frequency_jitter);
  read(j, "phase_jitter", t.phase_jitter);
  read(j, "position_jitter", t.position_jitter);
  read(j, "noise", t.noise);
  read(j, "energy", t.energy);
  read(j, "seed", t.seed);
  t.validate();
  return t;
}

json task_spec_to_json(const TaskSpec& t) {
  return json{{"n_classes", t.n_classes},
              {"samples_per_class", t.samples_per_class},
              {"shape", {t.shape.height, t.shape.width}},
              {"frequency_min", t.frequency_min},
              {"frequency_max", t.frequency_max},
              {"envelope", t.envelope},
              {"orientation_jitter", t.orientation_jitter},
              {"frequency_jitter", t.frequency_jitter},
              {"phase_jitter", t.phase_jitter},
              {"position_jitter", t.position_jitter},
              {"noise", t.noise},
              {"energy", t.energy},
              {"seed", t.seed}};
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  return config_guard([&] {
    allow(j, {"seed", "target", "population", "task", "search", "measures", "study", "output"}, "config");
    RunConfig c;
    c.source = j;
    c.base_dir = base_dir;
    if (!j.contains("seed")) fail(ErrorKind::Config, "config needs a master 'seed'");
    c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("target")) c.target = j["target"];
    if (const auto it = j.find("population"); it != j.end()) {
      if (it->is_string()) {
        c.population = resolve(base_dir, it->get<std::string>());
        if (!std::filesystem::exists(*c.population)) fail(ErrorKind::Config, "population manifest not found: " + c.population->string());
      } else {
        allow(*it, {"levels", "count", "seed", "ranges"}, "population");
        c.population_spec = *it;
      }
    }
    if (j.contains("task")) c.task = task_spec_from_json(j["task"]);
    if (j.contains("search")) c.search = search_config_from_json(j["search"]);
    c.search.seed = c.seed;
    if (const auto it = j.find("measures"); it != j.end()) {
      allow(*it, {"subspace_runs", "subspace_delta_pi", "walks", "reconstructions", "reference_index"}, "measures");
      read(*it, "subspace_runs", c.subspace_runs);
      if (it->contains("subspace_delta_pi")) c.subspace_delta = (*it)["subspace_delta_pi"].get<double>() * std::numbers::pi;
      read(*it, "walks", c.walks);
      read(*it, "reconstructions", c.reconstructions);
      if (it->contains("reference_index")) c.reference_index = (*it)["reference_index"].get<int>();
      if (c.subspace_runs < 2 || c.walks < 1 || c.reconstructions < 1) {
        fail(ErrorKind::Config, "measure run counts must be positive (subspace_runs >= 2)");
      }
    }
    c.study.search = c.search;
    c.study.seed = c.seed;
    if (const auto it = j.find("study"); it != j.end()) {
      allow(*it,
            {"n_references", "n_pairs", "osep_top_fraction", "osep_units", "subspace_delta_pi", "subspace_runs",
             "reconstructions", "permutations"},
            "study");
      read(*it, "n_references", c.study.n_references);
      read(*it, "n_pairs", c.study.n_pairs);
      read(*it, "osep_top_fraction", c.study.osep_top_fraction);
      read(*it, "osep_units", c.study.osep_units);
      if (it->contains("subspace_delta_pi")) {
        c.study.subspace_delta = (*it)["subspace_delta_pi"].get<double>() * std::numbers::pi;
      }
      read(*it, "subspace_runs", c.study.subspace_runs);
      read(*it, "reconstructions", c.study.reconstructions);
      read(*it, "permutations", c.study.permutations);
    }
    c.study.validate();
    if (j.contains("output")) c.output = resolve(base_dir, j["output"].get<std::string>());
    return c;
  });
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, "malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

namespace {

SthorSpec sthor_spec_of(const json& t, const std::filesystem::path& base_dir) {
  if (const auto it = t.find("spec"); it != t.end()) {
    if (it->is_string()) return sthor_spec_from_json(read_file(resolve(base_dir, it->get<std::string>())));
    return sthor_spec_from_json(it->dump());
  }
  int levels = 1;
  std::uint64_t weight_seed = 0;
  read(t, "levels", levels);
  read(t, "weight_seed", weight_seed);
  return default_sthor_spec(levels, weight_seed);
}

}  // namespace

TargetHandle build_target(const json& t, const std::filesystem::path& base_dir) {
  allow(t, {"kind", "shape", "seed", "weights", "spec", "levels", "weight_seed", "unit"}, "target");
  const std::string kind = t.value("kind", "sthor");
  if (kind == "linear") {
    if (const auto it = t.find("weights"); it != t.end()) {
      std::ifstream in(resolve(base_dir, it->get<std::string>()));
      if (!in) fail(ErrorKind::Config, "cannot read linear weights");
      const Stimulus w = read_csv(in);
      return linear_neuron(project_sphere(w.values(), 1.0, w.shape()));
    }
    const Shape shape = shape_from(t.at("shape"));
    Rng rng(derive_seed(t.value("seed", std::uint64_t{1}), "linear"));
    std::normal_distribution<double> g;
    std::vector<double> w(shape.size());
    for (double& v : w) v = g(rng);
    return linear_neuron(project_sphere(w, 1.0, shape));
  }
  if (kind == "quadratic") {
    const Shape shape = shape_from(t.at("shape"));
    const auto n = static_cast<Eigen::Index>(shape.size());
    Rng rng(derive_seed(t.value("seed", std::uint64_t{1}), "quadratic"));
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const Eigen::MatrixXd q = (a + a.transpose()) / std::sqrt(2.0 * static_cast<double>(n));
    return quadratic_neuron(q, Eigen::VectorXd::Zero(n), 0.0, shape);
  }
  if (kind == "sthor") {
    const SthorSpec spec = sthor_spec_of(t, base_dir);
    TargetHandle net;
    if (const auto it = t.find("weights"); it != t.end()) {
      std::ifstream in(resolve(base_dir, it->get<std::string>()), std::ios::binary);
      if (!in) fail(ErrorKind::Config, "cannot read network weights");
      net = TargetHandle(std::make_shared<const SthorNetwork>(spec, read_weights(in)));
    } else {
      net = sthor_network(spec);
    }
    if (const auto it = t.find("unit"); it != t.end()) return unit_view(net, it->get<int>());
    return net;
  }
  fail(ErrorKind::Config, "unknown target kind '" + kind + "'");
}

NetworkPopulation build_population(const RunConfig& config) {
  if (config.population) {
    NetworkPopulation pop;
    pop.manifest = manifest_from_json(read_file(*config.population));
    for (const auto& spec : pop.manifest) pop.handles.push_back(sthor_network(spec));
    return pop;
  }
  if (config.population_spec) {
    const json& p = *config.population_spec;
    HyperRanges ranges;
    if (p.contains("ranges")) ranges = hyper_ranges_from_json(p["ranges"].dump());
    return sample_network_population(default_sthor_spec(p.value("levels", 2)), p.value("count", 20), ranges,
                                     p.value("seed", config.seed));
  }
  fail(ErrorKind::Config, "config needs a 'population' manifest path or block");
}

}  // namespace tuneprobe::cli
