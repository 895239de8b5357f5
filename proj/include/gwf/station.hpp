#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gwf/time.hpp"

namespace gwf {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct StationMeta {
    std::string id;
    double latitude = 0.0;   // degrees north
    double longitude = 0.0;  // degrees east
    double elevation = 0.0;  // m above sea level; geopotential height of the barometer

    /// Throws InvalidInput when the coordinates are out of range.
    void validate() const;
};

/// Hourly record of one station on a contiguous hourly grid starting at
/// `start`. Missing values are NaN in every field.
///
/// Units: speed m/s (>= 0), direction radians in [0, 2pi) in the
/// mathematical convention (counterclockwise from east, the direction the
/// air moves toward), temperature degC, pressure hPa.
struct StationSeries {
    StationMeta meta;
    UtcHour start{};
    std::vector<double> speed;
    std::vector<double> direction;
    std::vector<double> temperature;
    std::vector<double> pressure;

    std::size_t size() const { return speed.size(); }
    UtcHour time_at(std::size_t i) const { return start + std::int64_t(i); }
    std::optional<std::size_t> index_of(UtcHour t) const;

    void resize(std::size_t n);
    /// Pads with missing values so the series covers [first, first + n).
    StationSeries aligned(UtcHour first, std::size_t n) const;
};

/// A set of stations sharing one hourly grid.
struct Network {
    UtcHour start{};
    std::size_t hours = 0;
    std::vector<StationSeries> stations;

    const StationSeries& station(const std::string& id) const;
    std::optional<std::size_t> find(const std::string& id) const;
    UtcHour end() const { return start + std::int64_t(hours); }
};

/// Aligns series to the union of their time ranges.
Network make_network(std::vector<StationSeries> series);

/// Meteorological "from" degrees to mathematical "toward" radians in [0, 2pi).
double met_deg_to_math_rad(double deg);
double math_rad_to_met_deg(double rad);
double wrap_two_pi(double rad);

}  // namespace gwf
