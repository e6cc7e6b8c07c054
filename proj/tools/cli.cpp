#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "tuneprobe/bench.hpp"
#include "tuneprobe/error.hpp"
#include "tuneprobe/measures.hpp"
#include "tuneprobe/report_io.hpp"
#include "tuneprobe/search.hpp"
#include "tuneprobe/seeding.hpp"
#include "tuneprobe/work_pool.hpp"

namespace tuneprobe::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string dir;
  std::string anchor;
  std::string spec;
  std::string ranges;
  std::string kind = "invariance";
  std::optional<std::uint64_t> seed;
  int levels = 1;
  int count = 1;
  int workers = default_workers();
  bool resume = false;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_stimulus(const fs::path& stem, const Stimulus& x) {
  {
    std::ofstream out(stem.string() + ".csv");
    write_csv(out, x);
  }
  std::ofstream out(stem.string() + ".pgm", std::ios::binary);
  write_pgm(out, x);
}

void write_strip(const fs::path& path, std::span<const Stimulus> panels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  write_pgm_strip(out, panels);
}

RunConfig load(const Options& o) {
  if (o.config.empty()) fail(ErrorKind::Config, "--config is required");
  RunConfig c = load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.search.seed = *o.seed;
    c.study.seed = *o.seed;
    c.source["seed"] = *o.seed;
  }
  if (!o.out.empty()) c.output = o.out;
  c.study.workers = o.workers;
  return c;
}

TargetHandle config_target(const RunConfig& c) {
  if (!c.target) fail(ErrorKind::Config, "config needs a 'target'");
  return build_target(*c.target, c.base_dir);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed artifact: ") + e.what());
  }
}

Stimulus stimulus_from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot read stimulus " + path.string());
  return read_csv(in);
}

struct Anchor {
  Stimulus x_hat;
  double fitness = 0.0;
};

Anchor find_anchor(const TargetHandle& target, const RunConfig& c, const Options& o, const fs::path& out) {
  if (!o.anchor.empty()) {
    Stimulus x = stimulus_from_file(o.anchor);
    const double f = path_objective_target(target, x).scalar(x.values());
    return {std::move(x), f};
  }
  const auto opt = optimal_stimulus(target, c.search);
  write_file(out / "optimum.json", optimal_stimulus_json(opt) + "\n");
  write_file(out / "trace.csv", trace_csv(opt.trace));
  write_stimulus(out / "x_hat", opt.x_hat);
  return {opt.x_hat, opt.fitness_at_optimum};
}

json header(const RunConfig& c) { return json{{"seed", c.seed}, {"config", c.source}}; }

// ---------------------------------------------------------------------------

int cmd_gen_net(const Options& o, std::ostream& out) {
  if (o.out.empty()) fail(ErrorKind::Config, "--out is required");
  NetworkPopulation pop;
  if (!o.spec.empty()) {
    SthorSpec spec = sthor_spec_from_json(read_file(o.spec));
    if (o.seed) spec.weight_seed = *o.seed;
    pop.handles.push_back(sthor_network(spec));
    pop.manifest.push_back(spec);
  } else {
    const SthorSpec base = default_sthor_spec(o.levels, o.seed.value_or(0));
    if (o.count == 1 && o.ranges.empty()) {
      pop.handles.push_back(sthor_network(base));
      pop.manifest.push_back(base);
    } else {
      const HyperRanges ranges = o.ranges.empty() ? HyperRanges{} : hyper_ranges_from_json(read_file(o.ranges));
      pop = sample_network_population(base, o.count, ranges, o.seed.value_or(1));
    }
  }
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_file(dir / "manifest.json", manifest_to_json(pop.manifest) + "\n");
  json files = json::array();
  for (std::size_t i = 0; i < pop.handles.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "network_%03zu.bin", i);
    std::ofstream w(dir / name, std::ios::binary);
    write_weights(w, static_cast<const SthorNetwork&>(*pop.handles[i].function()));
    files.push_back(name);
  }
  const Shape shape = pop.handles.front().input_shape();
  out << json{{"networks", pop.handles.size()},
              {"input_shape", {shape.height, shape.width}},
              {"response_dim", pop.handles.front().response_dim()},
              {"weights", files}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int cmd_characterize(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const TargetHandle target = config_target(c);
  if (target.response_dim() != 1) fail(ErrorKind::InvalidArgument, "characterize needs a single-unit target ('unit')");
  const fs::path dir = c.output;
  fs::create_directories(dir);

  const auto opt = optimal_stimulus(target, c.search);
  const Stimulus& x_hat = opt.x_hat;
  PathResult inv, sel;
  SubspaceSample sub;
  parallel_for(3, o.workers, [&](std::size_t job) {
    if (job == 0) inv = invariance_path(target, x_hat, c.search);
    if (job == 1) sel = selectivity_path(target, x_hat, c.search);
    if (job == 2) sub = subspace_sample(target, x_hat, PathKind::Invariance, c.subspace_delta, c.subspace_runs, c.search);
  });
  Rng walk_rng(derive_seed(c.seed, "walks"));
  const auto walks = random_walk_curve(target, x_hat, c.search.deltas, c.walks, walk_rng);
  const std::vector<PathResult> paths{inv, sel};
  const auto fd = build_fd_diagram(paths, walks, opt.fitness_at_optimum);

  MeasureReport report;
  report.ossc = spectral_complexity(x_hat);
  try {
    report.inpp = path_potential_unit(inv, opt.fitness_at_optimum);
    report.slpp = path_potential_unit(sel, opt.fitness_at_optimum);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonPositiveOptimum) throw;
  }
  report.insc = subspace_capacity(sub);
  report.provenance["seed"] = std::to_string(c.seed);
  report.provenance["optimum_budget"] = std::to_string(c.search.budget(c.search.optimum_budget_factor, x_hat.size()));
  report.provenance["path_budget"] = std::to_string(c.search.budget(c.search.path_budget_factor, x_hat.size()));
  report.provenance["subspace_runs"] = std::to_string(c.subspace_runs);
  report.provenance["walks"] = std::to_string(c.walks);

  ConstraintAudit audit;
  audit.check(inv, x_hat, c.search.energy);
  audit.check(sel, x_hat, c.search.energy);
  audit.check(sub, x_hat, c.search.energy);

  write_file(dir / "optimum.json", optimal_stimulus_json(opt) + "\n");
  write_file(dir / "trace.csv", trace_csv(opt.trace));
  write_stimulus(dir / "x_hat", x_hat);
  write_file(dir / "invariance_path.json", path_json(inv) + "\n");
  write_file(dir / "selectivity_path.json", path_json(sel) + "\n");
  write_file(dir / "invariance_path.csv", path_csv(inv));
  write_file(dir / "selectivity_path.csv", path_csv(sel));
  write_file(dir / "invariance_subspace.json", subspace_json(sub) + "\n");
  write_file(dir / "fd_diagram.csv", fd_diagram_csv(fd));
  write_file(dir / "fd_means.csv", fd_means_csv(fd));
  std::vector<Stimulus> strip{x_hat};
  strip.insert(strip.end(), inv.points.begin(), inv.points.end());
  write_strip(dir / "invariance_path.pgm", strip);
  strip.resize(1);
  strip.insert(strip.end(), sel.points.begin(), sel.points.end());
  write_strip(dir / "selectivity_path.pgm", strip);
  write_strip(dir / "invariance_subspace.pgm", sub.columns);

  json j = header(c);
  j["target"] = target.describe();
  j["fitness_at_optimum"] = opt.fitness_at_optimum;
  j["measures"] = json::parse(measure_report_to_json(report));
  j["audit"] = json::parse(audit_to_json(audit));
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "report.json", text);
  out << text;
  return kExitOk;
}

int cmd_paths(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const TargetHandle target = config_target(c);
  const fs::path dir = c.output;
  fs::create_directories(dir);
  const Anchor anchor = find_anchor(target, c, o, dir);
  PathResult inv, sel;
  parallel_for(2, o.workers, [&](std::size_t job) {
    if (job == 0) inv = invariance_path(target, anchor.x_hat, c.search);
    if (job == 1) sel = selectivity_path(target, anchor.x_hat, c.search);
  });
  json j = header(c);
  j["anchor_fitness"] = anchor.fitness;
  for (const auto* p : {&inv, &sel}) {
    const std::string name(to_string(p->kind));
    write_file(dir / (name + "_path.json"), path_json(*p) + "\n");
    write_file(dir / (name + "_path.csv"), path_csv(*p));
    std::vector<Stimulus> strip{anchor.x_hat};
    strip.insert(strip.end(), p->points.begin(), p->points.end());
    write_strip(dir / (name + "_path.pgm"), strip);
    j[name] = p->fitnesses;
    if (target.response_dim() == 1) {
      try {
        j[name + "_potential"] = path_potential_unit(*p, anchor.fitness);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonPositiveOptimum) throw;
        j[name + "_potential"] = nullptr;
      }
    } else {
      j[name + "_potential"] = path_potential_population(*p);
    }
  }
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "paths.json", text);
  out << text;
  return kExitOk;
}

int cmd_subspace(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const TargetHandle target = config_target(c);
  const PathKind kind = path_kind_from_string(o.kind);
  const fs::path dir = c.output;
  fs::create_directories(dir);
  const Anchor anchor = find_anchor(target, c, o, dir);
  const auto sample = subspace_sample(target, anchor.x_hat, kind, c.subspace_delta, c.subspace_runs, c.search);
  const std::string name = std::string(to_string(kind)) + "_subspace";
  write_file(dir / (name + ".json"), subspace_json(sample) + "\n");
  write_strip(dir / (name + ".pgm"), sample.columns);
  json j = header(c);
  j["kind"] = o.kind;
  j["delta"] = sample.delta;
  j["fitnesses"] = sample.fitnesses;
  j["capacity"] = subspace_capacity(sample);
  if (c.task) {
    const StimulusSet task = generate_task_stimuli(*c.task);
    const Alignment a = subspace_alignment(sample, task, &anchor.x_hat);
    j["alignment"] = a.raw;
    j["alignment_normalized"] = *a.normalized;
  }
  const std::string text = j.dump(2) + "\n";
  write_file(dir / (name + "_summary.json"), text);
  out << text;
  return kExitOk;
}

int cmd_encode(const Options& o, std::ostream& out) {
  const RunConfig c = load(o);
  const TargetHandle target = config_target(c);
  if (!c.task) fail(ErrorKind::Config, "encode needs a 'task'");
  const StimulusSet task = generate_task_stimuli(*c.task);
  const int index = c.reference_index.value_or(0);
  if (index < 0 || static_cast<std::size_t>(index) >= task.size()) {
    fail(ErrorKind::IndexOutOfRange, "reference_index outside the task set");
  }
  const fs::path dir = c.output;
  fs::create_directories(dir);
  const auto recons = reconstruct(target, task[static_cast<std::size_t>(index)], c.reconstructions, c.search);
  const SsimParams params = ssim_params_for(recons.reference);
  std::vector<double> scores;
  for (const auto& x : recons.reconstructions) scores.push_back(ssim(recons.reference, x, params));
  std::vector<Stimulus> strip{recons.reference};
  strip.insert(strip.end(), recons.reconstructions.begin(), recons.reconstructions.end());
  write_strip(dir / "reconstructions.pgm", strip);
  json j = header(c);
  j["reference_index"] = index;
  j["fitnesses"] = recons.fitnesses;
  j["ssim"] = scores;
  j["tses"] = encoding_specificity(recons, params);
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "encode.json", text);
  out << text;
  return kExitOk;
}

int cmd_measure(const Options& o, std::ostream& out) {
  if (o.dir.empty()) fail(ErrorKind::Config, "--dir is required");
  const fs::path dir(o.dir);
  const json opt = parse_json(read_file(dir / "optimum.json"));
  const Shape shape{opt.at("shape").at(0).get<int>(), opt.at("shape").at(1).get<int>()};
  const Stimulus x_hat(shape, opt.at("x_hat").get<std::vector<double>>());
  const double f_opt = opt.at("fitness_at_optimum").get<double>();
  MeasureReport report;
  report.ossc = spectral_complexity(x_hat);
  if (fs::exists(dir / "invariance_path.json") && fs::exists(dir / "selectivity_path.json")) {
    const PathResult inv = path_from_json(read_file(dir / "invariance_path.json"));
    const PathResult sel = path_from_json(read_file(dir / "selectivity_path.json"));
    try {
      report.inpp = path_potential_unit(inv, f_opt);
      report.slpp = path_potential_unit(sel, f_opt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonPositiveOptimum) throw;
    }
  }
  if (fs::exists(dir / "invariance_subspace.json")) {
    report.insc = subspace_capacity(subspace_from_json(read_file(dir / "invariance_subspace.json")));
  }
  out << measure_report_to_json(report) << "\n";
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  RunConfig c = load(o);
  if (!c.task) fail(ErrorKind::Config, "bench needs a 'task'");
  const NetworkPopulation pop = build_population(c);
  const StimulusSet task = generate_task_stimuli(*c.task);
  if (task.shape() != pop.handles.front().input_shape()) {
    fail(ErrorKind::Config, "task shape " + to_string(task.shape()) + " does not match network input " +
                                to_string(pop.handles.front().input_shape()));
  }
  const fs::path dir = c.output;
  fs::create_directories(dir);
  c.study.artifact_dir = dir;
  c.study.resume = o.resume;
  const auto references = sample_references(task, c.study.n_references, derive_seed(c.seed, "references"));
  write_file(dir / "manifest.json", manifest_to_json(pop.manifest) + "\n");
  json run = header(c);
  run["references"] = references;
  write_file(dir / "run.json", run.dump(2) + "\n");

  const BenchResult result = run_study(pop.handles, task, references, c.study);
  json j = header(c);
  j["networks"] = result.networks.size();
  j["audit"] = json::parse(audit_to_json(result.audit));
  json table = json::array();
  for (const auto& row : result.table) {
    auto cell = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    table.push_back(json{{"measure", row.measure},
                         {"spearman", cell(row.spearman)},
                         {"pearson", cell(row.pearson)},
                         {"p_perm", cell(row.p_perm)},
                         {"r2", cell(row.r2)}});
  }
  j["correlations"] = table;
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "summary.json", text);
  out << text;
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.dir.empty()) fail(ErrorKind::Config, "--dir is required");
  const fs::path dir(o.dir);
  const json run = parse_json(read_file(dir / "run.json"));
  const json& source = run.at("config");
  json study_only{{"seed", source.at("seed")}};
  for (const char* key : {"search", "study"}) {
    if (source.contains(key)) study_only[key] = source[key];
  }
  const RunConfig c = parse_config(study_only, dir);
  std::vector<NetworkRecord> records;
  for (int i = 0;; ++i) {
    const fs::path path = network_dir(dir, i) / "result.json";
    if (!fs::exists(path)) break;
    const json r = parse_json(read_file(path));
    NetworkRecord rec;
    rec.index = r.at("index").get<int>();
    rec.performance = r.at("performance").get<double>();
    rec.measures = measure_report_from_json(r.at("measures").dump());
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(ErrorKind::Io, "no network results under " + dir.string());
  const auto table = correlation_table(records, c.study);
  const std::string csv = correlation_csv(table);
  write_file(dir / "correlations.csv", csv);
  out << csv;
  return kExitOk;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Black-box tuning-landscape characterization of neurons and networks", "tuneprobe"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("gen-net", "Generate network specs and weight files");
  gen->add_option("--spec", o.spec, "Network spec JSON");
  gen->add_option("--levels", o.levels, "Default spec depth (1 or 2)")->check(CLI::Range(1, 2));
  gen->add_option("--count", o.count, "Number of networks to sample")->check(CLI::PositiveNumber);
  gen->add_option("--ranges", o.ranges, "Hyperparameter ranges JSON");
  gen->add_option("--seed", o.seed, "Weight / population seed");
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* characterize = app.add_subcommand("characterize", "Optimal stimulus, paths, subspace and unit measures");
  add_common(characterize);
  auto* paths = app.add_subcommand("paths", "Invariance and selectivity paths");
  add_common(paths);
  paths->add_option("--anchor", o.anchor, "Anchor stimulus CSV (skips the optimum search)");
  auto* subspace = app.add_subcommand("subspace", "Subspace sample at one cone angle");
  add_common(subspace);
  subspace->add_option("--anchor", o.anchor, "Anchor stimulus CSV (skips the optimum search)");
  subspace->add_option("--kind", o.kind, "invariance or selectivity");
  auto* encode = app.add_subcommand("encode", "Reconstruct a task stimulus from its response");
  add_common(encode);
  auto* measure = app.add_subcommand("measure", "Recompute unit measures from a characterize directory");
  measure->add_option("--dir", o.dir, "characterize output directory")->required();
  auto* bench = app.add_subcommand("bench", "Measure-vs-performance study over a network population");
  add_common(bench);
  bench->add_flag("--resume", o.resume, "Reuse finished per-network results");
  auto* report = app.add_subcommand("report", "Recompute the correlation table from a bench directory");
  report->add_option("--dir", o.dir, "bench output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_net(o, out);
    if (characterize->parsed()) return cmd_characterize(o, out);
    if (paths->parsed()) return cmd_paths(o, out);
    if (subspace->parsed()) return cmd_subspace(o, out);
    if (encode->parsed()) return cmd_encode(o, out);
    if (measure->parsed()) return cmd_measure(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
    if (report->parsed()) return cmd_report(o, out);
  } catch (const Error& e) {
    print_error(err, std::string(to_string(e.kind())), e.what());
    return e.kind() == ErrorKind::Config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace tuneprobe::cli
