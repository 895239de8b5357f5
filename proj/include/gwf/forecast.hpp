#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwf/model.hpp"
#include "gwf/predictive.hpp"
#include "gwf/time.hpp"

namespace gwf::forecast {

/// One k-hour-ahead forecast. `point` is the median of `distribution` when
/// one is present; persistence records carry no distribution. An
/// unavailable forecast has a missing point and the fallback flag set.
struct ForecastRecord {
    std::string station;
    UtcHour issue_time{};
    int horizon = 1;
    std::optional<predictive::TruncatedNormal> distribution;
    double point = kMissing;
    bool fallback = false;
    double observed = kMissing;

    bool available() const { return !is_missing(point); }
};

struct Persistence {
    double value = kMissing;
    bool flagged = false;  // value predates the issue time
};

/// Latest observation at or before t, looking back at most `max_lookback`
/// hours; empty when there is none.
std::optional<Persistence> persistence(const std::vector<double>& series, UtcHour start, UtcHour t,
                                       std::int64_t max_lookback);

struct RollingConfig {
    UtcHour test_start{};
    UtcHour test_end{};  // exclusive
    std::int64_t window_hours = 45 * 24;
    std::int64_t refit_hours = 24;
    int restarts = 3;
    double ftol = 1e-8;
    std::size_t max_evals = 0;
    std::uint64_t seed = 0;
    int jobs = 1;

    /// Throws ConfigError listing each violated constraint against `data`.
    void validate(const model::ModelData& data) const;
};

/// One (target, horizon) forecasting job. `warm`, when given, seeds the
/// first fit alongside the least-squares start.
struct Task {
    model::FeatureSpec spec;
    std::optional<model::Coefficients> warm;
};

/// Forecasts for one task: refits every `refit_hours` on the rows whose
/// targets fall in the trailing window ending at the refit time, then
/// issues hourly. Falls back to persistence when the model cannot be
/// evaluated, and marks the record unavailable when persistence has no
/// observation within the window. PSS issues persistence throughout.
std::vector<ForecastRecord> run_task(const model::ModelData& data, const model::VariantName& variant,
                                     const Task& task, const RollingConfig& config);

/// Runs the tasks on `config.jobs` workers. Records are ordered by model
/// station, issue time and horizon whatever the scheduling.
std::vector<ForecastRecord> run_rolling(const model::ModelData& data, const model::VariantName& variant,
                                        const std::vector<Task>& tasks, const RollingConfig& config);

/// The full feature pool for each target and horizon.
std::vector<Task> full_tasks(const model::ModelData& data, const model::VariantName& variant,
                             const std::vector<std::size_t>& targets, const std::vector<int>& horizons,
                             int max_lag = model::kMaxLag);

/// Columns: station, issue_time, horizon, mu, sigma, point, fallback, observed.
std::string to_csv(const std::vector<ForecastRecord>& records);
void write_csv(const std::vector<ForecastRecord>& records, const std::string& path);
std::vector<ForecastRecord> read_csv(const std::string& path);

}  // namespace gwf::forecast
