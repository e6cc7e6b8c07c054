#include "tuneprobe/error.hpp"

namespace tuneprobe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::ImprobableFailure: return "ImprobableFailure";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::Asymmetric: return "Asymmetric";
    case ErrorKind::InfeasibleGeometry: return "InfeasibleGeometry";
    case ErrorKind::NonPositiveOptimum: return "NonPositiveOptimum";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace tuneprobe
