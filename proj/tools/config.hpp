#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tuneprobe/bench.hpp"
#include "tuneprobe/search.hpp"
#include "tuneprobe/targets.hpp"

namespace tuneprobe::cli {

using nlohmann::json;

/// A parsed run configuration. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  json source;  // the config as read, echoed into reports
  std::filesystem::path base_dir;
  std::uint64_t seed = 1;
  std::optional<json> target;
  std::optional<std::filesystem::path> population;
  std::optional<json> population_spec;  // {"levels", "count", "seed", "ranges"}
  std::optional<TaskSpec> task;
  SearchConfig search;
  StudyConfig study;
  int subspace_runs = 20;
  double subspace_delta = 0.1 * 3.141592653589793;
  int walks = 20;
  int reconstructions = 10;
  std::optional<int> reference_index;
  std::filesystem::path output = "out";
};

/// Reads and validates a config file. Every failure is ErrorKind::Config.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const json& j, const std::filesystem::path& base_dir);

SearchConfig search_config_from_json(const json& j);
TaskSpec task_spec_from_json(const json& j);
json task_spec_to_json(const TaskSpec& spec);

/// Builds the target described by a "target" object.
TargetHandle build_target(const json& target, const std::filesystem::path& base_dir);

/// Population from a manifest path or a {"levels", "count", "seed"} block.
NetworkPopulation build_population(const RunConfig& config);

}  // namespace tuneprobe::cli
