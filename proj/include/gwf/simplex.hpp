#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace gwf::simplex {

struct Options {
    std::size_t max_evals = 0;  // 0 means 500 per parameter
    double ftol = 1e-8;         // stop when a full cycle of n+1 iterations gains less than this
    int restarts = 3;           // extra runs from the incumbent with a reseeded simplex
    std::uint64_t seed = 0;
};

struct Result {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evals = 0;
    bool converged = false;
    /// Best value after every iteration; non-increasing.
    std::vector<double> trace;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han 2012).
/// `step` gives the initial edge length per coordinate. Non-finite
/// objective values are treated as +inf.
Result minimize(const Objective& f, std::vector<double> x0, std::vector<double> step, const Options& options = {});

}  // namespace gwf::simplex
