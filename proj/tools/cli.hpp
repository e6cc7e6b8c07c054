#pragma once

#include <iosfwd>

namespace tuneprobe::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

/// Entry point of the tuneprobe command. Results go to files and `out`;
/// failures print a JSON error object to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tuneprobe::cli
