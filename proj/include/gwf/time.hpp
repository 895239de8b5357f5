#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gwf {

/// An hour on the UTC clock, counted from 1970-01-01T00:00Z.
struct UtcHour {
    std::int64_t index = 0;

    constexpr UtcHour operator+(std::int64_t h) const { return {index + h}; }
    constexpr UtcHour operator-(std::int64_t h) const { return {index - h}; }
    constexpr std::int64_t operator-(UtcHour o) const { return index - o.index; }
    constexpr UtcHour& operator++() { ++index; return *this; }
    constexpr auto operator<=>(const UtcHour&) const = default;
};

/// Fixed offset of the network's local standard time from UTC.
struct TimeZone {
    int utc_offset_hours = 0;
};

enum class Season { DJF = 0, MAM = 1, JJA = 2, SON = 3 };

struct CivilTime {
    int year, month, day, hour, minute, second;
};

/// Seconds since epoch of an ISO-8601 timestamp. Accepts
/// `YYYY-MM-DDTHH:MM[:SS][Z]` and the same with a space separator.
std::optional<std::int64_t> parse_iso8601_seconds(std::string_view text);

/// Parses and floors to the containing UTC hour.
std::optional<UtcHour> parse_iso8601_hour(std::string_view text);

/// `YYYY-MM-DDTHH:00:00Z`
std::string to_iso8601(UtcHour h);

CivilTime civil_from_seconds(std::int64_t seconds);
std::int64_t seconds_from_civil(const CivilTime& c);

UtcHour hour_from_civil(int year, int month, int day, int hour = 0);

int hour_of_day(UtcHour t, TimeZone tz);
/// Day number (days since 1970-01-01) of the local calendar day containing t.
std::int64_t local_day(UtcHour t, TimeZone tz);
/// First UTC hour of a local calendar day.
UtcHour local_day_start(std::int64_t day, TimeZone tz);
int local_month(UtcHour t, TimeZone tz);
Season season_of_month(int month);
Season local_season(UtcHour t, TimeZone tz);

std::string_view season_name(Season s);

}  // namespace gwf
