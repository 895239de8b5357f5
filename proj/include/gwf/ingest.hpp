#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwf/station.hpp"

namespace gwf::ingest {

enum class DirectionConvention { Meteorological, Mathematical };

/// Maps file columns to roles and declares the units of each field.
///
/// Units accepted: speed "m/s", "kt", "mph", "km/h"; direction "deg",
/// "rad"; temperature "degC", "degF", "K"; pressure "hPa", "mb", "Pa",
/// "kPa", "inHg". A header written as `name [unit]` must agree with the
/// declared unit.
struct Schema {
    std::string time_column = "time";
    std::string station_column = "station";
    std::string speed_column = "speed";
    std::string direction_column = "direction_deg";
    std::string temperature_column = "temp_c";
    std::string pressure_column = "pressure_hpa";
    std::vector<std::string> ignore_columns;

    std::string speed_unit = "m/s";
    std::string direction_unit = "deg";
    std::string temperature_unit = "degC";
    std::string pressure_unit = "hPa";
    DirectionConvention direction_convention = DirectionConvention::Meteorological;

    std::vector<double> sentinels{-999.0, -9999.0};
    double min_fraction = 0.75;   // share of expected records an hour needs
    std::int64_t interval_seconds = 0;  // sampling interval; 0 infers it per station

    /// Throws ConfigError listing each violated constraint.
    void validate() const;
    /// Missing keys keep their defaults; unknown keys are an error.
    static Schema from_json(const std::string& text);
    std::string to_json() const;
};

Schema load_schema(const std::string& path);

/// One raw record in canonical units; direction in mathematical radians.
struct Record {
    std::int64_t seconds = 0;
    double speed = kMissing;
    double direction = kMissing;
    double temperature = kMissing;
    double pressure = kMissing;
};

struct StationRecords {
    std::string id;
    std::vector<Record> records;  // sorted by time
};

struct LoadResult {
    std::vector<StationRecords> stations;  // in order of first appearance
    std::size_t rows = 0;
    std::vector<std::size_t> malformed_lines;
};

/// Reads a station archive. Rows with the wrong field count, unparseable
/// numbers or negative speeds are skipped and reported; an unparseable
/// timestamp, an unknown column or an empty file raises LoadError.
LoadResult load_csv(const std::string& path, const Schema& schema);

/// Hourly means on [floor hour, next hour). Scalars average arithmetically,
/// direction as the mean unit vector. A field is missing for an hour with
/// fewer than ceil(min_fraction * expected) values, where expected is
/// 3600 / interval. Hourly input passes through unchanged.
StationSeries hourly_average(const StationRecords& records, const StationMeta& meta, double min_fraction = 0.75,
                             std::int64_t interval_seconds = 0);

/// Most common positive spacing between consecutive records, in seconds.
std::int64_t infer_interval(const std::vector<Record>& records);

/// id, latitude, longitude, elevation
std::vector<StationMeta> load_station_meta(const std::string& path);
void write_station_meta(const std::vector<StationMeta>& metas, const std::string& path);

/// Loads, averages and aligns every station listed in the metadata file.
/// Stations absent from the archive are an error.
Network load_network(const std::string& data_path, const std::string& meta_path, const Schema& schema);

/// Canonical hourly CSV in the default schema: meteorological degrees, m/s, degC, hPa.
void write_hourly_csv(const Network& network, const std::string& path);

}  // namespace gwf::ingest
