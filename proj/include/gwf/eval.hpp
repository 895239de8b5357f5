#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwf/forecast.hpp"
#include "gwf/geostrophy.hpp"
#include "gwf/station.hpp"

namespace gwf::eval {

/// Running sums of one score cell; means are derived from them, so
/// monthly cells pool exactly into the overall cell.
struct Scores {
    std::size_t n = 0;       // scored records
    std::size_t n_prob = 0;  // of which carry a distribution
    double sum_abs = 0.0;
    double sum_sq = 0.0;
    double sum_crps = 0.0;
    double sum_width = 0.0;  // probabilistic records only

    void add(double error, double crps, std::optional<double> width);
    Scores& operator+=(const Scores& o);

    double mae() const;
    double rmse() const;
    /// Records without a distribution score as point masses: CRPS = |error|.
    double crps() const;
    /// Mean 90% central interval width; NaN without probabilistic records.
    double width90() const;
};

struct Cell {
    std::string station;
    std::string variant;
    int horizon = 0;
    std::map<std::string, Scores> monthly;  // "YYYY-MM" of the verification time
    Scores overall;
    std::vector<std::size_t> pit;  // empty without probabilistic records
};

struct ScoreOptions {
    bool include_fallbacks = true;
    int pit_bins = 10;
    TimeZone tz{};  // month boundaries
};

struct ScoreReport {
    bool include_fallbacks = true;
    std::vector<Cell> cells;  // ordered by station, variant, horizon as first seen

    const Cell* find(const std::string& station, const std::string& variant, int horizon) const;
    void merge(const ScoreReport& other);
};

/// Scores every record with a point forecast and an observation. Throws
/// EmptyReport when nothing is scorable.
ScoreReport score(const std::vector<forecast::ForecastRecord>& records, const std::string& variant,
                  const ScoreOptions& options = {});

/// 100 (baseline - model) / baseline; empty when the baseline is zero or either value is missing.
std::optional<double> relative_reduction(double baseline, double model);

enum class Metric { MAE, RMSE, CRPS, Width90 };
std::string to_string(Metric m);
double value(const Scores& s, Metric m);

struct Reduction {
    std::string station;
    int horizon = 0;
    std::string variant;
    std::string baseline;
    Metric metric = Metric::MAE;
    std::string period;  // "YYYY-MM" or "overall"
    std::optional<double> percent;
};

/// Reductions of every non-baseline cell against the baseline variant's
/// cell with the same station and horizon.
std::vector<Reduction> relative_reductions(const ScoreReport& report, const std::string& baseline, Metric metric);

struct PitTest {
    double statistic = 0.0;
    double p_value = 0.0;
    std::size_t n = 0;
    bool uniform_at(double level) const { return p_value > 1.0 - level; }
};

/// Pearson chi-square test of equal bin probabilities.
PitTest pit_chi_square(const std::vector<std::size_t>& counts);

/// Bin index of a PIT value in [0, 1].
std::size_t pit_bin(double u, int bins);

struct Correlation {
    std::string variable;
    int horizon = 0;
    int lag = 0;
    double r = kMissing;  // missing with fewer than 30 pairs
    std::size_t pairs = 0;
};

/// Pearson correlation of y_{target, t+k} with each variable at t - lag:
/// station speeds, cos and sin of station directions, geostrophic speed
/// and cos and sin of geostrophic direction. `geo` may be empty.
std::vector<Correlation> lag_correlations(const Network& network, const geostrophy::GeoWindSeries& geo,
                                          const std::string& target, const std::vector<int>& horizons,
                                          int max_lag);

std::string scores_csv(const ScoreReport& report);
std::string pit_csv(const ScoreReport& report);
std::string reductions_csv(const std::vector<Reduction>& rows);
std::string correlations_csv(const std::vector<Correlation>& rows);

/// Months as columns with "Overall" last; one block per station and
/// horizon, rows grouped by metric and variant.
std::string text_table(const ScoreReport& report);

}  // namespace gwf::eval
