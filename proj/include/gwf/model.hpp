#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwf/diurnal.hpp"
#include "gwf/geostrophy.hpp"
#include "gwf/predictive.hpp"
#include "gwf/station.hpp"
#include "gwf/time.hpp"

namespace gwf::model {

constexpr int kMaxLag = 10;
constexpr int kMaxHorizon = 6;
constexpr double kSigmaFloor = 1e-8;

/// Model variants. PSS is persistence and has no regression.
enum class Variant { PSS, TDD, TDDGW, TDDGWT, TDDGWD, TDDGWDT };

struct VariantName {
    Variant variant = Variant::TDD;
    diurnal::Method method = diurnal::Method::TRIG;
};

/// "TDD", "TDDGW-MD", "TDDGWDT-SMD", ... A bare name uses the trigonometric
/// diurnal model.
VariantName parse_variant(const std::string& s);
std::string to_string(const VariantName& v);
std::string to_string(Variant v);

/// Lags are stored as the largest lag used; -1 leaves the family out.
struct FeatureSpec {
    std::size_t target = 0;  // index into the model stations
    int horizon = 1;
    std::vector<int> speed_lags;
    std::vector<int> direction_lags;
    int gw_lags = -1;
    bool include_gw = false;
    bool include_gw_direction = false;
    bool include_temp_diff = false;
    diurnal::Method diurnal_method = diurnal::Method::TRIG;

    /// Every lag of every family in the variant's pool at `max_lag`.
    static FeatureSpec full(const VariantName& v, std::size_t n_stations, std::size_t target, int horizon,
                            int max_lag = kMaxLag);

    std::size_t n_stations() const { return speed_lags.size(); }
    /// Throws ConfigError listing each violated constraint.
    void validate() const;
};

enum class Term { Intercept, Speed, DirCos, DirSin, Gw, GwCos, GwSin, TempDiff };

struct Feature {
    Term term = Term::Intercept;
    std::size_t station = 0;
    int lag = 0;
};

/// Column layout of a feature row in the fixed order: intercept; speed
/// residual lags per station; cos/sin direction residual pairs per
/// station; geostrophic speed residual lags; geostrophic cos, sin;
/// 24-hour temperature difference at the target.
std::vector<Feature> layout(const FeatureSpec& spec);
std::size_t row_length(const FeatureSpec& spec);
std::vector<std::string> feature_names(const FeatureSpec& spec, const std::vector<std::string>& station_ids);

/// Residualized inputs for a group of model stations on one hourly grid.
struct ModelData {
    UtcHour start{};
    std::size_t hours = 0;
    TimeZone tz{};
    diurnal::Method method = diurnal::Method::TRIG;
    std::vector<std::string> station_ids;
    std::vector<std::vector<double>> speed;
    std::vector<std::vector<double>> speed_resid;
    std::vector<diurnal::DiurnalSchedule> speed_diurnal;
    std::vector<std::vector<double>> cos_resid;
    std::vector<std::vector<double>> sin_resid;
    std::vector<std::vector<double>> temperature;
    std::vector<double> gw_resid;
    std::vector<double> gw_cos;
    std::vector<double> gw_sin;
    std::vector<double> volatility;

    bool contains(UtcHour t) const { return t >= start && t < start + std::int64_t(hours); }
    std::size_t index(UtcHour t) const { return std::size_t(t - start); }
    /// Value of a per-hour series at t; NaN outside the grid.
    double at(const std::vector<double>& v, UtcHour t) const;
    /// Diurnal value of the target station for the issue day of `issue`, at hour of day of `when`.
    double diurnal_value(std::size_t station, UtcHour issue, UtcHour when) const;
    std::size_t station_index(const std::string& id) const;
};

struct DataOptions {
    diurnal::Method method = diurnal::Method::TRIG;
    int window_days = 45;
    /// End of the training record; SMD and YMD profiles use only data before it.
    UtcHour training_end{};
    TimeZone tz{};
};

/// Residualizes speeds with the chosen diurnal method, direction cos/sin
/// with the rolling trigonometric fit, and geostrophic speed with the
/// chosen method. `geo` may be empty when no variant uses it.
ModelData prepare(const Network& network, const geostrophy::GeoWindSeries& geo,
                  const std::vector<std::string>& stations, const DataOptions& options);

/// sqrt((1/2S) sum_s sum_{l=0,1} (r_{s,t-l} - r_{s,t-l-1})^2); each entry
/// holds one station's residuals at (t-2, t-1, t). NaN if any is missing.
double volatility(std::span<const std::array<double, 3>> residuals);

/// Fills `out` (length row_length(spec)) for issue time t. False when a
/// referenced value is missing.
bool build_row(const ModelData& data, const FeatureSpec& spec, UtcHour t, std::span<double> out);
std::optional<std::vector<double>> build_row(const ModelData& data, const FeatureSpec& spec, UtcHour t);

/// Every issue time of the data grid as one design row, with its target.
struct Design {
    FeatureSpec spec;
    UtcHour start{};
    Eigen::MatrixXd x;              // hours x p
    std::vector<char> features_ok;  // row complete, volatility present
    std::vector<double> observed;   // y at t+k
    std::vector<double> diurnal;    // profile of t's day at hour of t+k
    std::vector<double> vol;

    std::size_t rows() const { return observed.size(); }
    UtcHour time_at(std::size_t i) const { return start + std::int64_t(i); }
    bool trainable(std::size_t i) const;
};

Design build_design(const ModelData& data, const FeatureSpec& spec);

/// Row indices whose target time lies in (end - window_hours, end].
std::vector<std::size_t> training_rows(const Design& d, UtcHour end, std::int64_t window_hours);

struct Coefficients {
    std::vector<double> center;  // aligned with layout(spec)
    double b0 = 1.0;
    double b1 = 0.0;
};

struct BicStep {
    std::string added;
    double bic = 0.0;
};

struct BicResult {
    FeatureSpec spec;
    double bic = 0.0;
    std::size_t rows = 0;
    std::vector<BicStep> path;
};

/// Greedy forward selection over contiguous lag bundles, scoring
/// n ln(SSE/n) + p ln n of the least-squares center fit on rows whose
/// targets fall in (from, to]. The pool is FeatureSpec::full(base) with
/// lags up to `max_lag`. Throws TrainingDataError when fewer than ten rows
/// per candidate coefficient are available.
BicResult select_lags_bic(const ModelData& data, const FeatureSpec& base, UtcHour from, UtcHour to,
                          int max_lag = kMaxLag);

struct FitOptions {
    int restarts = 3;
    std::uint64_t seed = 0;
    double ftol = 1e-8;
    std::size_t max_evals = 0;  // 0 means 500 per parameter
};

struct FitResult {
    Coefficients coefficients;
    Coefficients initial;
    double crps_initial = 0.0;
    double crps = 0.0;
    std::size_t evals = 0;
    std::size_t rows = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// Least-squares center with a scale fitted to absolute residuals.
Coefficients least_squares_init(const Design& d, std::span<const std::size_t> rows);

/// Mean CRPS of the truncated normal model over the rows.
double mean_crps(const Design& d, std::span<const std::size_t> rows, const Coefficients& c);

/// Minimizes mean CRPS over (center, log b0, log b1) by simplex search,
/// started from the better of the least-squares fit and `warm`.
FitResult fit_crps(const Design& d, std::span<const std::size_t> rows, const FitOptions& options = {},
                   const Coefficients* warm = nullptr);

struct TrainedModel {
    VariantName variant;
    FeatureSpec spec;
    Coefficients coefficients;
    UtcHour window_start{};  // first target time in the window
    UtcHour window_end{};    // last target time in the window
    std::vector<std::string> station_ids;
    std::vector<std::array<double, 24>> diurnal;  // per station, in force at window_end
    std::uint64_t seed = 0;
    double train_crps = 0.0;
};

/// mu = D(t+k) + x(t).center, sigma = max(b0 + b1 v(t), 1e-8). Empty when a
/// feature or the diurnal value is missing.
std::optional<predictive::TruncatedNormal> predict_params(const TrainedModel& m, const Design& d, UtcHour t);
std::optional<predictive::TruncatedNormal> predict_params(const TrainedModel& m, const ModelData& data, UtcHour t);

std::string to_json(const TrainedModel& m);
TrainedModel model_from_json(const std::string& text);
void save_bundle(const std::vector<TrainedModel>& models, const std::string& path);
std::vector<TrainedModel> load_bundle(const std::string& path);

}  // namespace gwf::model
