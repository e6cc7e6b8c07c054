#pragma once

#include <cstddef>
#include <functional>

namespace tuneprobe {

/// Number of logical cores, at least 1.
int default_workers();

/// Runs job(0) ... job(n_jobs - 1) on at most `workers` threads. Jobs are
/// claimed in index order. If any job throws, remaining unclaimed jobs are
/// skipped and the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n_jobs, int workers, const std::function<void(std::size_t)>& job);

}  // namespace tuneprobe
