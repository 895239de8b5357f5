#pragma once

#include <cstddef>
#include <functional>

namespace gwf {

/// Worker count: GWF_JOBS when set to a positive integer, else `requested`
/// when positive, else the hardware concurrency.
int resolve_jobs(int requested);

/// Runs body(0) .. body(n-1) on up to `jobs` threads. Every index runs; the
/// exception of the lowest failing index is rethrown afterwards.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace gwf
