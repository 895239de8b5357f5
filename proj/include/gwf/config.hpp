#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwf/geostrophy.hpp"
#include "gwf/ingest.hpp"
#include "gwf/synth.hpp"
#include "gwf/time.hpp"

namespace gwf::config {

/// Everything one run needs. Read from a single JSON file; see
/// configs/synthetic.json for the layout. Relative paths resolve against
/// the config file's directory.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string output = "run";
    int jobs = 0;  // 0: hardware concurrency

    // Data: either a synthetic benchmark or station files.
    std::optional<synth::SynthConfig> synth;
    std::string hourly_csv;
    std::string stations_csv;
    ingest::Schema schema;

    std::vector<std::string> stations;  // geostrophic network; empty means all
    std::vector<std::string> targets;
    TimeZone tz{};

    geostrophy::PhysicalConstants constants{};
    geostrophy::MeanRemovalPolicy mean_removal = geostrophy::MeanRemovalPolicy::PerStationMonthlyMean;
    std::size_t min_stations = 3;

    UtcHour train_start{};
    UtcHour train_end{};  // exclusive
    UtcHour test_start{};
    UtcHour test_end{};  // exclusive

    std::vector<std::string> variants{"PSS", "TDD", "TDDGW-MD"};
    std::vector<int> horizons{1, 2, 3, 4, 5, 6};
    int window_days = 45;
    int diurnal_window_days = 45;
    int refit_hours = 24;
    int max_lag = 10;
    bool select_lags = true;

    int restarts = 3;
    double ftol = 1e-8;
    std::size_t max_evals = 0;

    int pit_bins = 10;
    std::string baseline = "PSS";

    /// Throws ConfigError listing every violated constraint.
    void validate() const;
    /// Unknown keys are errors. `base_dir` anchors relative paths.
    static RunConfig from_json(const std::string& text, const std::string& base_dir = "");
    std::string to_json() const;
};

RunConfig load(const std::string& path);

}  // namespace gwf::config
