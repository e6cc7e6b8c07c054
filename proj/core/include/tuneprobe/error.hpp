#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tuneprobe {

enum class ErrorKind {
  ZeroVector,
  NonFinite,
  DegenerateDirection,
  ImprobableFailure,
  EmptySet,
  ShapeMismatch,
  NonFiniteObjective,
  InvalidArgument,
  IndexOutOfRange,
  Asymmetric,
  InfeasibleGeometry,
  NonPositiveOptimum,
  ZeroVariance,
  RankDeficient,
  DegenerateSplit,
  Io,
  Config,
};

std::string_view to_string(ErrorKind kind);

// All failures raised by the library carry a kind so callers (and the CLI's
// machine-readable error output) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace tuneprobe
