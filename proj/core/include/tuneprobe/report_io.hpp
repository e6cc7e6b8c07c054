#pragma once

#include <string>

#include "tuneprobe/measures.hpp"
#include "tuneprobe/search.hpp"
#include "tuneprobe/solver.hpp"

namespace tuneprobe {

/// evaluations,fitness
std::string trace_csv(const SearchTrace& trace);
/// delta,fitness
std::string path_csv(const PathResult& path);
/// series,delta,fitness
std::string fd_diagram_csv(const FitnessDistanceDiagram& diagram);
/// series,delta,mean_fitness
std::string fd_means_csv(const FitnessDistanceDiagram& diagram);

std::string measure_report_to_json(const MeasureReport& report, int indent = 2);
MeasureReport measure_report_from_json(const std::string& text);

/// Summary of an optimal-stimulus search; the stimulus itself is included as
/// a row-major value array.
std::string optimal_stimulus_json(const OptimalStimulusResult& result, int indent = 2);

std::string path_json(const PathResult& path, int indent = 2);
PathResult path_from_json(const std::string& text);

std::string subspace_json(const SubspaceSample& sample, int indent = 2);
SubspaceSample subspace_from_json(const std::string& text);

std::string audit_to_json(const ConstraintAudit& audit, int indent = 2);

}  // namespace tuneprobe
