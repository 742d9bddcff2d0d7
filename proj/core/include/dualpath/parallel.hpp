#pragma once

#include <cstddef>
#include <functional>

namespace dualpath {

/// Name of the environment variable that overrides the worker count.
inline constexpr const char* kWorkersEnvVar = "DUALPATH_WORKERS";

/// Worker count from DUALPATH_WORKERS, else std::thread::hardware_concurrency().
std::size_t default_worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Tasks must write
/// only to their own output slot; the first exception (lowest index) is
/// rethrown after all workers join. workers == 0 means default_worker_count().
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace dualpath
