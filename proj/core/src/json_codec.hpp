#pragma once

// JSON codecs shared by the artifact store and the report writers.

#include <optional>

#include "json.hpp"
#include "tuneprobe/measures.hpp"
#include "tuneprobe/search.hpp"

namespace tuneprobe::codec {

using nlohmann::json;

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> optional_from_json(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

inline json measures_json(const MeasureReport& m) {
  return json{{"ossc", optional_json(m.ossc)},
              {"osep", optional_json(m.osep)},
              {"inpp", optional_json(m.inpp)},
              {"slpp", optional_json(m.slpp)},
              {"insc", optional_json(m.insc)},
              {"itsa", optional_json(m.itsa)},
              {"stsa", optional_json(m.stsa)},
              {"itsa_normalized", optional_json(m.itsa_normalized)},
              {"stsa_normalized", optional_json(m.stsa_normalized)},
              {"tses", optional_json(m.tses)},
              {"provenance", m.provenance}};
}

inline MeasureReport measures_from_json(const json& j) {
  MeasureReport m;
  m.ossc = optional_from_json(j, "ossc");
  m.osep = optional_from_json(j, "osep");
  m.inpp = optional_from_json(j, "inpp");
  m.slpp = optional_from_json(j, "slpp");
  m.insc = optional_from_json(j, "insc");
  m.itsa = optional_from_json(j, "itsa");
  m.stsa = optional_from_json(j, "stsa");
  m.itsa_normalized = optional_from_json(j, "itsa_normalized");
  m.stsa_normalized = optional_from_json(j, "stsa_normalized");
  m.tses = optional_from_json(j, "tses");
  if (j.contains("provenance")) m.provenance = j["provenance"].get<std::map<std::string, std::string>>();
  return m;
}

inline json audit_json(const ConstraintAudit& a) {
  return json{{"checked", a.checked},
              {"sphere_violations", a.sphere_violations},
              {"cone_violations", a.cone_violations},
              {"max_sphere_residual", a.max_sphere_residual},
              {"max_cone_residual", a.max_cone_residual}};
}

inline ConstraintAudit audit_from_json(const json& j) {
  ConstraintAudit a;
  a.checked = j.at("checked").get<std::size_t>();
  a.sphere_violations = j.at("sphere_violations").get<std::size_t>();
  a.cone_violations = j.at("cone_violations").get<std::size_t>();
  a.max_sphere_residual = j.at("max_sphere_residual").get<double>();
  a.max_cone_residual = j.at("max_cone_residual").get<double>();
  return a;
}

}  // namespace tuneprobe::codec
