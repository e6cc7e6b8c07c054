#pragma once

#include <cstdint>
#include <string_view>

namespace tuneprobe {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a job, a pure function of the master seed and a job path such as
/// "net/3/unit/7/invariance". Execution order never affects derived seeds.
std::uint64_t derive_seed(std::uint64_t master, std::string_view path);
std::uint64_t derive_seed(std::uint64_t master, std::string_view path, std::uint64_t index);

}  // namespace tuneprobe
