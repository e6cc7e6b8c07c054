#include "tuneprobe/report_io.hpp"

#include <cstdio>

#include "json_codec.hpp"
#include "tuneprobe/error.hpp"

namespace tuneprobe {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

json values(const Stimulus& x) { return std::vector<double>(x.values().begin(), x.values().end()); }

json stimuli(std::span<const Stimulus> xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(values(x));
  return a;
}

std::vector<Stimulus> stimuli_from(const json& a, Shape shape) {
  std::vector<Stimulus> out;
  for (const auto& v : a) out.emplace_back(shape, v.get<std::vector<double>>());
  return out;
}

Shape shape_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json shape_of(std::span<const Stimulus> xs) {
  if (xs.empty()) return json::array({0, 0});
  return json::array({xs.front().height(), xs.front().width()});
}

json trace_json(const SearchTrace& t) {
  json history = json::array();
  for (const auto& p : t.best_fitness_history) history.push_back({p.evaluations, p.fitness});
  return json{{"termination", std::string(to_string(t.termination))},
              {"evaluations", t.evaluations},
              {"generations", t.generations},
              {"best_fitness_history", history}};
}

}  // namespace

std::string trace_csv(const SearchTrace& trace) {
  std::string out = "evaluations,fitness\n";
  for (const auto& p : trace.best_fitness_history) out += std::to_string(p.evaluations) + "," + fmt(p.fitness) + "\n";
  return out;
}

std::string path_csv(const PathResult& path) {
  std::string out = "delta,fitness\n";
  for (std::size_t k = 0; k < path.deltas.size(); ++k) out += fmt(path.deltas[k]) + "," + fmt(path.fitnesses[k]) + "\n";
  return out;
}

std::string fd_diagram_csv(const FitnessDistanceDiagram& diagram) {
  std::string out = "series,delta,fitness\n";
  for (const auto& s : diagram.samples) {
    out += std::string(to_string(s.series)) + "," + fmt(s.delta) + "," + fmt(s.fitness) + "\n";
  }
  return out;
}

std::string fd_means_csv(const FitnessDistanceDiagram& diagram) {
  std::string out = "series,delta,mean_fitness\n";
  for (const auto& [series, means] : diagram.means) {
    for (std::size_t k = 0; k < diagram.grid.size(); ++k) {
      if (means[k]) out += std::string(to_string(series)) + "," + fmt(diagram.grid[k]) + "," + fmt(*means[k]) + "\n";
    }
  }
  return out;
}

std::string measure_report_to_json(const MeasureReport& report, int indent) {
  return codec::measures_json(report).dump(indent);
}

MeasureReport measure_report_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    return codec::measures_from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad measure report: ") + e.what());
  }
}

std::string optimal_stimulus_json(const OptimalStimulusResult& result, int indent) {
  json runs = json::array();
  for (const auto& r : result.runs) {
    runs.push_back(json{{"seed", r.seed},
                        {"fitness", r.fitness},
                        {"init_fitness", r.init.fitness},
                        {"init_alpha", r.init.alpha},
                        {"init_index", r.init.index},
                        {"trace", trace_json(r.trace)}});
  }
  const json j{{"shape", {result.x_hat.height(), result.x_hat.width()}},
               {"energy", result.x_hat.energy()},
               {"fitness_at_optimum", result.fitness_at_optimum},
               {"init_alpha", result.init_source.alpha},
               {"init_fitness", result.init_source.fitness},
               {"runs", runs},
               {"x_hat", values(result.x_hat)}};
  return j.dump(indent);
}

std::string path_json(const PathResult& path, int indent) {
  json traces = json::array();
  for (const auto& t : path.traces) traces.push_back(trace_json(t));
  const json j{{"kind", std::string(to_string(path.kind))},
               {"run_index", path.run_index},
               {"shape", shape_of(path.points)},
               {"deltas", path.deltas},
               {"fitnesses", path.fitnesses},
               {"traces", traces},
               {"points", stimuli(path.points)}};
  return j.dump(indent);
}

PathResult path_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    PathResult p;
    p.kind = path_kind_from_string(j.at("kind").get<std::string>());
    p.run_index = j.value("run_index", 0);
    p.deltas = j.at("deltas").get<std::vector<double>>();
    p.fitnesses = j.at("fitnesses").get<std::vector<double>>();
    if (j.contains("points")) p.points = stimuli_from(j["points"], shape_from(j.at("shape")));
    if (p.deltas.size() != p.fitnesses.size()) fail(ErrorKind::Config, "path needs one fitness per delta");
    return p;
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad path: ") + e.what());
  }
}

std::string subspace_json(const SubspaceSample& sample, int indent) {
  const json j{{"kind", std::string(to_string(sample.kind))},
               {"delta", sample.delta},
               {"shape", shape_of(sample.columns)},
               {"fitnesses", sample.fitnesses},
               {"columns", stimuli(sample.columns)}};
  return j.dump(indent);
}

SubspaceSample subspace_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    SubspaceSample s;
    s.kind = path_kind_from_string(j.at("kind").get<std::string>());
    s.delta = j.at("delta").get<double>();
    s.fitnesses = j.at("fitnesses").get<std::vector<double>>();
    s.columns = stimuli_from(j.at("columns"), shape_from(j.at("shape")));
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad subspace sample: ") + e.what());
  }
}

std::string audit_to_json(const ConstraintAudit& audit, int indent) { return codec::audit_json(audit).dump(indent); }

}  // namespace tuneprobe
